mod common;

use proptest::prelude::*;

use voxtok_core::codebook::CodebookBuilder;
use voxtok_core::rle::{parse_rle, render_rle, render_runs};
use voxtok_core::stream::{decode_stream, encode_grid_tokens};
use voxtok_core::{
    build_codebook, column_order, delinearize, encode_grid, iou, linearize, parse_binvox, rle_decode, rle_encode,
    write_binvox, BinvoxHeader, BuildParams, Cell, Dims, RleSequence, Run, TraversalStrategy, VoxelGrid,
};

fn strategy() -> impl Strategy<Value = TraversalStrategy> {
    prop::sample::select(TraversalStrategy::ALL.to_vec())
}

fn dims(max: usize) -> impl Strategy<Value = Dims> {
    (1..=max, 1..=max, 1..=max).prop_map(|(w, d, h)| Dims::new(w, d, h).unwrap())
}

fn grid(max: usize) -> impl Strategy<Value = VoxelGrid> {
    (dims(max), 0.0..=1.0f64, any::<u64>()).prop_map(|(dims, density, seed)| {
        common::random_grid(&mut common::rng(seed), dims, density)
    })
}

fn cells() -> impl Strategy<Value = Vec<Cell>> {
    prop::collection::vec(prop::bool::weighted(0.3).prop_map(Cell::from), 1..2000)
}

/// Cell at `(x, y, z)` read directly, without the flat-index helpers.
fn brute_get(grid: &VoxelGrid, x: usize, y: usize, z: usize) -> Cell {
    grid.get(x, y, z).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn set_then_get(g in grid(12), x in 0usize..12, y in 0usize..12, z in 0usize..12, full in any::<bool>()) {
        let mut g = g;
        let d = g.dims();
        let (x, y, z) = (x % d.width, y % d.depth, z % d.height);
        g.set(x, y, z, Cell::from(full)).unwrap();
        prop_assert_eq!(g.get(x, y, z).unwrap(), Cell::from(full));
    }

    #[test]
    fn occupied_count_matches_scan(g in grid(16)) {
        let d = g.dims();
        let mut n = 0;
        for x in 0..d.width {
            for y in 0..d.depth {
                for z in 0..d.height {
                    n += brute_get(&g, x, y, z).is_full() as usize;
                }
            }
        }
        prop_assert_eq!(g.occupied_count(), n);
    }

    #[test]
    fn linearize_matches_direct_lookup(g in grid(8), s in strategy()) {
        let d = g.dims();
        let order = column_order(s, (d.width, d.depth)).unwrap();
        let seq = linearize(&g, s);
        prop_assert_eq!(seq.len(), d.cell_count());
        for (k, &(x, y)) in order.columns().iter().enumerate() {
            for z in 0..d.height {
                prop_assert_eq!(seq[k * d.height + z], brute_get(&g, x, y, z));
            }
        }
        prop_assert_eq!(seq.iter().filter(|c| c.is_full()).count(), g.occupied_count());
    }

    #[test]
    fn delinearize_inverts_linearize(g in grid(12), s in strategy()) {
        prop_assert_eq!(delinearize(&linearize(&g, s), s, g.dims()).unwrap(), g);
    }

    #[test]
    fn rle_lossless_and_canonical(seq in cells()) {
        let rle = rle_encode(&seq).unwrap();
        prop_assert!(rle.is_canonical());
        prop_assert_eq!(rle.rep_sum() as usize, seq.len());
        prop_assert_eq!(rle_decode(&rle).unwrap(), seq);
        prop_assert_eq!(parse_rle(&render_rle(&rle)).unwrap(), rle);
    }

    #[test]
    fn rle_decode_accepts_non_canonical(runs in prop::collection::vec((1u64..50, any::<bool>()), 1..40)) {
        let runs: Vec<Run> = runs.into_iter().map(|(n, f)| Run::new(n, Cell::from(f))).collect();
        let rle = RleSequence::from_runs(runs.clone()).unwrap();
        let expanded: Vec<Cell> = runs.iter().flat_map(|r| std::iter::repeat_n(r.val, r.rep as usize)).collect();
        prop_assert_eq!(rle_decode(&rle).unwrap(), expanded.clone());
        prop_assert_eq!(rle_encode(&expanded).unwrap(), rle.canonicalize());
    }

    #[test]
    fn spaced_text_parses(seq in cells()) {
        let rle = rle_encode(&seq).unwrap();
        let spaced: Vec<String> = rle.runs().iter().map(Run::to_string).collect();
        prop_assert_eq!(parse_rle(&spaced.join(" ")).unwrap(), rle);
    }

    #[test]
    fn binvox_round_trip(g in grid(16), tx in -5.0f64..5.0, scale in 0.01f64..4.0) {
        let mut header = BinvoxHeader::new(g.dims());
        header.translate[0] = tx.to_string();
        header.scale = scale.to_string();
        let bytes = write_binvox(&header, &g).unwrap();
        let (h2, g2) = parse_binvox(&bytes).unwrap();
        prop_assert_eq!(h2, header);
        prop_assert_eq!(g2, g);
    }

    #[test]
    fn iou_matches_triple_loop(seed in any::<u64>(), da in 0.0..1.0f64, db in 0.0..1.0f64) {
        let mut r = common::rng(seed);
        let dims = Dims::cube(9).unwrap();
        let a = common::random_grid(&mut r, dims, da);
        let b = common::random_grid(&mut r, dims, db);
        let (mut inter, mut uni) = (0u64, 0u64);
        for x in 0..9 {
            for y in 0..9 {
                for z in 0..9 {
                    let (p, q) = (brute_get(&a, x, y, z).is_full(), brute_get(&b, x, y, z).is_full());
                    inter += (p && q) as u64;
                    uni += (p || q) as u64;
                }
            }
        }
        let r = iou(&a, &b).unwrap();
        prop_assert_eq!((r.intersection, r.union), (inter, uni));
        prop_assert_eq!(iou(&b, &a).unwrap(), r);
        prop_assert!((0.0..=1.0).contains(&r.iou));
        if a.occupied_count() > 0 {
            prop_assert_eq!(iou(&a, &a).unwrap().iou, 1.0);
        }
    }

    #[test]
    fn codebook_end_to_end(grids in prop::collection::vec(grid(8), 1..6), s in strategy(), max_runs in 1usize..6) {
        let corpus: Vec<RleSequence> = grids.iter().map(|g| encode_grid(g, s)).collect();
        let params = BuildParams { max_pattern_runs: max_runs, ..BuildParams::default() };
        let book = build_codebook(&corpus, s, params).unwrap();
        for (g, rle) in grids.iter().zip(&corpus) {
            let stream = encode_grid_tokens(g, &book).unwrap();
            prop_assert!(stream.tokens.len() <= rle.len());
            prop_assert_eq!(&decode_stream(&stream, &book).unwrap(), g);
        }
    }

    #[test]
    fn builder_rounds_preserve_corpus(
        seqs in prop::collection::vec(prop::collection::vec((1u64..4, any::<bool>()), 1..30), 1..5),
        max_runs in 2usize..5,
    ) {
        let corpus: Vec<RleSequence> = seqs
            .into_iter()
            .map(|runs| {
                let runs = runs.into_iter().map(|(n, f)| Run::new(n, Cell::from(f))).collect();
                RleSequence::from_runs(runs).unwrap().canonicalize()
            })
            .collect();
        let params = BuildParams { max_pattern_runs: max_runs, ..BuildParams::default() };
        let mut builder = CodebookBuilder::new(&corpus, params).unwrap();
        while builder.step().is_some() {
            prop_assert_eq!(&builder.expand_corpus(), &corpus);
        }
        let book = builder.finish(TraversalStrategy::Snake);
        let again = build_codebook(&corpus, TraversalStrategy::Snake, params).unwrap();
        prop_assert_eq!(book.to_bytes(), again.to_bytes());
        for seq in &corpus {
            let tokens = book.tokenize(seq).unwrap();
            prop_assert!(tokens.len() <= seq.len());
            prop_assert_eq!(&book.detokenize(&tokens).unwrap(), seq);
        }
    }
}

/// Builder reference that recounts the whole working corpus every round.
fn naive_patterns(corpus: &[RleSequence], max_runs: usize, max_vocab: usize) -> Vec<Vec<Run>> {
    // `None` marks a position already covered by a token.
    let mut work: Vec<Vec<Option<Run>>> = corpus.iter().map(|s| s.runs().iter().copied().map(Some).collect()).collect();
    let mut chosen = Vec::new();
    while chosen.len() < max_vocab {
        let mut counts: std::collections::HashMap<Vec<Run>, u64> = Default::default();
        for seq in &work {
            for len in 2..=max_runs {
                let mut free: std::collections::HashMap<Vec<Run>, usize> = Default::default();
                for p in 0..seq.len().saturating_sub(len - 1) {
                    let Some(w) = seq[p..p + len].iter().copied().collect::<Option<Vec<Run>>>() else { continue };
                    let f = free.entry(w.clone()).or_insert(0);
                    if p >= *f {
                        *f = p + len;
                        *counts.entry(w).or_insert(0) += 1;
                    }
                }
            }
        }
        let best = counts
            .into_iter()
            .filter(|(_, c)| *c >= 2)
            .max_by(|(a, ca), (b, cb)| {
                (ca * a.len() as u64, a.len())
                    .cmp(&(cb * b.len() as u64, b.len()))
                    .then_with(|| render_runs(b).cmp(&render_runs(a)))
            });
        let Some((pattern, _)) = best else { break };
        for seq in &mut work {
            let mut p = 0;
            while p + pattern.len() <= seq.len() {
                if seq[p..p + pattern.len()].iter().zip(&pattern).all(|(a, b)| *a == Some(*b)) {
                    seq[p..p + pattern.len()].fill(None);
                    p += pattern.len();
                } else {
                    p += 1;
                }
            }
        }
        chosen.push(pattern);
    }
    chosen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn builder_matches_naive_reference(
        seqs in prop::collection::vec(prop::collection::vec((1u64..4, any::<bool>()), 1..60), 1..6),
        max_runs in 2usize..6,
        max_vocab in 1usize..40,
    ) {
        let corpus: Vec<RleSequence> = seqs
            .into_iter()
            .map(|runs| {
                let runs = runs.into_iter().map(|(n, f)| Run::new(n, Cell::from(f))).collect();
                RleSequence::from_runs(runs).unwrap().canonicalize()
            })
            .collect();
        let params = BuildParams { max_pattern_runs: max_runs, max_vocab, ..BuildParams::default() };
        let mut builder = CodebookBuilder::new(&corpus, params).unwrap();
        builder.run();
        prop_assert_eq!(builder.patterns().to_vec(), naive_patterns(&corpus, max_runs, max_vocab));
    }
}

#[test]
fn permutation_for_every_small_shape() {
    for s in TraversalStrategy::ALL {
        for w in 1..=12 {
            for d in 1..=12 {
                let order = column_order(s, (w, d)).unwrap();
                let mut cols = order.columns().to_vec();
                cols.sort_unstable();
                let expected: Vec<_> = (0..w).flat_map(|x| (0..d).map(move |y| (x, y))).collect();
                assert_eq!(cols, expected, "{s} {w}x{d}");
                assert_eq!(order, column_order(s, (w, d)).unwrap());
            }
        }
    }
}

#[test]
fn snake_and_raster_share_first_row() {
    for w in 1..=32 {
        let snake = column_order(TraversalStrategy::Snake, (w, 3)).unwrap();
        let raster = column_order(TraversalStrategy::RasterScan, (w, 3)).unwrap();
        assert_eq!(snake.columns()[..w], raster.columns()[..w]);
    }
}
