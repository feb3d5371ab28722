#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxtok_core::binvox::write_binvox_file;
use voxtok_core::{BinvoxHeader, CorpusManifest, Dims, ManifestRecord, VoxelGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(rng: &mut impl Rng, dims: Dims, density: f64) -> VoxelGrid {
    VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(density)).unwrap()
}

/// Solid box `[lo, hi)` on every axis of an `n`-cube.
pub fn centered_cube(n: usize, lo: usize, hi: usize) -> VoxelGrid {
    let inside = |v: usize| (lo..hi).contains(&v);
    VoxelGrid::from_fn(Dims::cube(n).unwrap(), |x, y, z| inside(x) && inside(y) && inside(z)).unwrap()
}

pub fn centered_sphere(n: usize, radius: f64) -> VoxelGrid {
    let c = (n as f64 - 1.0) / 2.0;
    VoxelGrid::from_fn(Dims::cube(n).unwrap(), |x, y, z| {
        let d = |v: usize| v as f64 - c;
        d(x).powi(2) + d(y).powi(2) + d(z).powi(2) <= radius * radius
    })
    .unwrap()
}

/// Small object-like shapes: a chair-ish seat with legs, a table slab, a lamp pole.
pub fn shape(kind: usize, variant: usize) -> VoxelGrid {
    let v = variant % 4;
    VoxelGrid::from_fn(Dims::standard(), |x, y, z| match kind % 3 {
        0 => {
            let leg = (x == 8 + v || x == 23 - v) && (y == 8 || y == 23) && z < 12;
            let seat = (8 + v..24 - v).contains(&x) && (8..24).contains(&y) && (12..14).contains(&z);
            let back = (8 + v..24 - v).contains(&x) && y == 23 && (14..28).contains(&z);
            leg || seat || back
        }
        1 => {
            let top = (4..28).contains(&x) && (6 + v..26 - v).contains(&y) && (20..22).contains(&z);
            let legs = (x == 5 || x == 26) && (y == 7 + v || y == 24 - v) && z < 20;
            top || legs
        }
        _ => {
            let pole = (15..17).contains(&x) && (15..17).contains(&y) && z < 24;
            let base = (10..22).contains(&x) && (10..22).contains(&y) && z < 2 + v;
            let shade = (11..21).contains(&x) && (11..21).contains(&y) && (24..30).contains(&z);
            pole || base || shade
        }
    })
    .unwrap()
}

pub const CATEGORIES: [&str; 3] = ["chair", "table", "lamp"];

/// Writes `per_category` shapes per category as binvox files plus a manifest.
pub fn write_fixture_corpus(root: &Path, per_category: usize) -> (PathBuf, Vec<VoxelGrid>) {
    let mut records = Vec::new();
    let mut grids = Vec::new();
    for (kind, category) in CATEGORIES.iter().enumerate() {
        for variant in 0..per_category {
            let grid = shape(kind, variant);
            let rel = PathBuf::from(format!("{category}/obj{variant}/model.binvox"));
            let path = root.join(&rel);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            write_binvox_file(&path, &BinvoxHeader::new(grid.dims()), &grid).unwrap();
            records.push(ManifestRecord {
                object_id: format!("{category}/obj{variant}"),
                category: category.to_string(),
                binvox: rel,
                views: vec![PathBuf::from(format!("{category}/obj{variant}/00.png"))],
            });
            grids.push(grid);
        }
    }
    let manifest = CorpusManifest::new(root, records).unwrap();
    let path = root.join("manifest.jsonl");
    manifest.save(&path).unwrap();
    (path, grids)
}

/// Byte-for-byte hashes of every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
