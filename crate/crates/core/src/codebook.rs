//! Dictionary tokenization of run-length sequences.
//!
//! A [`Codebook`] maps dense token ids to non-empty run subsequences. It is
//! built greedily: the highest-scoring repeated pattern of 2 or more runs is
//! given the next id and its occurrences are cut out of the working corpus,
//! until nothing repeats often enough. Every bare run left over then gets a
//! singleton token, so the whole training corpus is coverable.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rle::{parse_rle, render_runs, RleBuilder, RleSequence, Run};
use crate::traversal::TraversalStrategy;

pub const CODEBOOK_VERSION: u32 = 1;

pub type TokenId = u32;

/// How competing candidate patterns are ranked during building.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRule {
    /// Occurrences times pattern length, ties to the longer pattern.
    #[default]
    FrequencyTimesLength,
    /// Longest pattern first, ties to the more frequent.
    LongestFirst,
    /// Most frequent pattern first, ties to the longer.
    MostFrequentFirst,
}

impl ScoreRule {
    fn key(self, count: u64, len: usize) -> (u64, u64) {
        let len = len as u64;
        match self {
            ScoreRule::FrequencyTimesLength => (count * len, len),
            ScoreRule::LongestFirst => (len, count),
            ScoreRule::MostFrequentFirst => (count, len),
        }
    }

    fn is_default(&self) -> bool {
        *self == ScoreRule::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BuildParams {
    /// Minimum non-overlapping occurrences for a pattern to get a token (at least 2).
    pub min_frequency: u64,
    /// Longest pattern considered, in runs.
    pub max_pattern_runs: usize,
    /// Cap on pattern tokens; singleton tokens are not counted.
    pub max_vocab: usize,
    #[serde(default, skip_serializing_if = "ScoreRule::is_default")]
    pub score: ScoreRule,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            min_frequency: 2,
            max_pattern_runs: 8,
            max_vocab: 4096,
            score: ScoreRule::default(),
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_frequency < 2 {
            return Err(Error::InvalidArgument(format!(
                "min_frequency must be at least 2, got {}",
                self.min_frequency
            )));
        }
        if self.max_pattern_runs < 1 {
            return Err(Error::InvalidArgument("max_pattern_runs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Default, Clone)]
struct TrieNode {
    children: HashMap<Run, u32>,
    token: Option<TokenId>,
}

#[derive(Clone)]
pub struct Codebook {
    strategy: TraversalStrategy,
    params: BuildParams,
    values: Vec<Vec<Run>>,
    trie: Vec<TrieNode>,
    id: String,
}

impl Codebook {
    /// Creates a codebook from token values in id order.
    pub fn new(strategy: TraversalStrategy, params: BuildParams, values: Vec<Vec<Run>>) -> Result<Self> {
        if values.len() > TokenId::MAX as usize {
            return Err(Error::InvalidArgument("too many tokens".into()));
        }
        let mut trie = vec![TrieNode::default()];
        for (id, value) in values.iter().enumerate() {
            if value.is_empty() {
                return Err(Error::Format(format!("token {id} has an empty value")));
            }
            if let Some(run) = value.iter().find(|r| r.rep == 0) {
                return Err(Error::Format(format!("token {id} contains zero-length run {run}")));
            }
            let mut node = 0usize;
            for run in value {
                node = match trie[node].children.get(run) {
                    Some(&child) => child as usize,
                    None => {
                        let child = trie.len();
                        trie.push(TrieNode::default());
                        trie[node].children.insert(*run, child as u32);
                        child
                    }
                };
            }
            if let Some(other) = trie[node].token.replace(id as TokenId) {
                return Err(Error::Format(format!(
                    "tokens {other} and {id} share the value {}",
                    render_runs(value)
                )));
            }
        }
        let mut book = Codebook {
            strategy,
            params,
            values,
            trie,
            id: String::new(),
        };
        book.id = format!("{:016x}", fnv1a64(&book.to_bytes()));
        Ok(book)
    }

    pub fn strategy(&self) -> TraversalStrategy {
        self.strategy
    }

    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, id: TokenId) -> Option<&[Run]> {
        self.values.get(id as usize).map(Vec::as_slice)
    }

    pub fn values(&self) -> impl Iterator<Item = (TokenId, &[Run])> {
        self.values.iter().enumerate().map(|(i, v)| (i as TokenId, v.as_slice()))
    }

    /// Token whose value is exactly `runs`.
    pub fn lookup(&self, runs: &[Run]) -> Option<TokenId> {
        let mut node = 0usize;
        for run in runs {
            node = *self.trie[node].children.get(run)? as usize;
        }
        self.trie[node].token
    }

    /// Hex FNV-1a 64 hash of the canonical saved form.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Lengths of every token value matching `runs` from its start.
    fn matches<'a>(&'a self, runs: &'a [Run]) -> impl Iterator<Item = (usize, TokenId)> + 'a {
        runs.iter()
            .scan(0usize, move |node, run| {
                *node = *self.trie[*node].children.get(run)? as usize;
                Some(*node)
            })
            .enumerate()
            .filter_map(move |(i, node)| self.trie[node].token.map(|t| (i + 1, t)))
    }

    /// Splits runs into token ids, preferring the longest match at each step.
    ///
    /// A longer match is skipped only when the remainder after it cannot be
    /// covered at all, so the result equals plain greedy longest-match
    /// whenever that succeeds.
    pub fn tokenize(&self, rle: &RleSequence) -> Result<Vec<TokenId>> {
        let runs = rle.runs();
        if runs.is_empty() {
            return Err(Error::InvalidArgument("cannot tokenize an empty sequence".into()));
        }
        let n = runs.len();
        let mut coverable = vec![false; n + 1];
        coverable[n] = true;
        for i in (0..n).rev() {
            coverable[i] = self.matches(&runs[i..]).any(|(len, _)| coverable[i + len]);
        }
        if !coverable[0] {
            let position = self.coverage_gap(runs);
            return Err(Error::OutOfVocabulary {
                run: runs[position],
                position,
            });
        }
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            let (len, token) = self
                .matches(&runs[i..])
                .filter(|(len, _)| coverable[i + len])
                .last()
                .expect("position is coverable");
            out.push(token);
            i += len;
        }
        Ok(out)
    }

    /// Furthest run index reachable from the start by chaining token matches.
    fn coverage_gap(&self, runs: &[Run]) -> usize {
        let mut reachable = vec![false; runs.len() + 1];
        reachable[0] = true;
        let mut furthest = 0;
        for i in 0..runs.len() {
            if !reachable[i] {
                continue;
            }
            furthest = i;
            for (len, _) in self.matches(&runs[i..]) {
                reachable[i + len] = true;
            }
        }
        furthest
    }

    /// Concatenates token values and merges adjacent runs with equal values.
    pub fn detokenize(&self, tokens: &[TokenId]) -> Result<RleSequence> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("token list is empty".into()));
        }
        let mut builder = RleBuilder::default();
        for &id in tokens {
            let value = self.value(id).ok_or(Error::InvalidToken {
                id,
                vocab_size: self.len(),
            })?;
            for run in value {
                builder.push_run(*run);
            }
        }
        Ok(builder.finish())
    }

    fn to_file(&self) -> CodebookFile {
        CodebookFile {
            version: CODEBOOK_VERSION,
            strategy: self.strategy,
            params: self.params,
            tokens: self
                .values
                .iter()
                .enumerate()
                .map(|(id, v)| TokenEntry {
                    id: id as TokenId,
                    value: render_runs(v),
                })
                .collect(),
        }
    }

    /// Canonical saved form: compact JSON followed by a newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec(&self.to_file()).expect("codebook serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let file: CodebookFile =
            serde_json::from_slice(bytes).map_err(|e| Error::Format(format!("malformed codebook: {e}")))?;
        if file.version != CODEBOOK_VERSION {
            return Err(Error::Format(format!(
                "unsupported codebook version {} (expected {CODEBOOK_VERSION})",
                file.version
            )));
        }
        file.params
            .validate()
            .map_err(|e| Error::Format(format!("codebook params: {e}")))?;
        let mut values = Vec::with_capacity(file.tokens.len());
        for (expected, entry) in file.tokens.iter().enumerate() {
            if entry.id as usize != expected {
                return Err(Error::Format(format!(
                    "token ids must be dense and ordered: expected id {expected}, found {}",
                    entry.id
                )));
            }
            let value = parse_rle(&entry.value)
                .map_err(|e| Error::Format(format!("token {}: {e}", entry.id)))?;
            values.push(value.into_runs());
        }
        Codebook::new(file.strategy, file.params, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

impl PartialEq for Codebook {
    fn eq(&self, other: &Self) -> bool {
        self.strategy == other.strategy && self.params == other.params && self.values == other.values
    }
}

impl Eq for Codebook {}

impl fmt::Debug for Codebook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Codebook")
            .field("id", &self.id)
            .field("strategy", &self.strategy)
            .field("params", &self.params)
            .field("tokens", &self.values.len())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    version: u32,
    strategy: TraversalStrategy,
    params: BuildParams,
    tokens: Vec<TokenEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TokenEntry {
    id: TokenId,
    value: String,
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

pub fn save_codebook(book: &Codebook) -> Vec<u8> {
    book.to_bytes()
}

pub fn load_codebook(bytes: &[u8]) -> Result<Codebook> {
    Codebook::from_bytes(bytes)
}

pub fn build_codebook(
    corpus: &[RleSequence],
    strategy: TraversalStrategy,
    params: BuildParams,
) -> Result<Codebook> {
    let mut builder = CodebookBuilder::new(corpus, params)?;
    builder.run();
    Ok(builder.finish(strategy))
}

// ---------------------------------------------------------------------------
// Builder

const NO_PATTERN: u32 = u32::MAX;

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    key: (u64, u64),
    text: Reverse<String>,
    count: u64,
    id: u32,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.text.cmp(&other.text))
            .then_with(|| self.count.cmp(&other.count))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy non-overlapping count over sorted occurrence offsets.
fn greedy_count(occurrences: impl IntoIterator<Item = usize>, len: usize) -> u64 {
    let mut free = 0;
    let mut count = 0;
    for q in occurrences {
        if q >= free {
            count += 1;
            free = q + len;
        }
    }
    count
}

/// Greedy codebook construction over a corpus of run sequences.
///
/// The corpus is flattened once and every window of up to `max_pattern_runs`
/// runs is interned to a pattern id. A chosen pattern marks its runs consumed. Non-overlapping
/// counts decompose over clusters of mutually overlapping occurrences, so a
/// substitution only recounts the clusters that lost an occurrence. Counts
/// never rise, which lets patterns below `min_frequency` after the first
/// count be dropped for good and heap entries go stale safely.
pub struct CodebookBuilder {
    params: BuildParams,
    runs: Vec<Run>,
    /// Start offset of each sequence, followed by the total length.
    bounds: Vec<usize>,
    consumed: Vec<bool>,
    placed: HashMap<usize, TokenId>,
    /// Window lengths per offset (`max_pattern_runs - 1`).
    width: usize,
    /// Pattern id of the `l`-run window at `p`, stored at `p * width + l - 2`.
    windows: Vec<u32>,
    /// First occurrence and length of each pattern id.
    first: Vec<(u32, u8)>,
    counts: Vec<u64>,
    /// False for patterns already chosen or never frequent enough.
    live: Vec<bool>,
    positions: Vec<Vec<u32>>,
    /// Step stamp per window slot, set on every member of a recounted cluster
    /// so each cluster is recounted once per step.
    stamps: Vec<u32>,
    heap: BinaryHeap<Candidate>,
    patterns: Vec<Vec<Run>>,
}

impl CodebookBuilder {
    pub fn new(corpus: &[RleSequence], params: BuildParams) -> Result<Self> {
        params.validate()?;
        if corpus.is_empty() {
            return Err(Error::InvalidArgument("codebook corpus is empty".into()));
        }
        if let Some(i) = corpus.iter().position(RleSequence::is_empty) {
            return Err(Error::InvalidArgument(format!("corpus sequence {i} is empty")));
        }
        if params.max_pattern_runs > u8::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "max_pattern_runs is at most {}, got {}",
                u8::MAX,
                params.max_pattern_runs
            )));
        }
        let mut runs = Vec::new();
        let mut bounds = Vec::with_capacity(corpus.len() + 1);
        for seq in corpus {
            bounds.push(runs.len());
            runs.extend_from_slice(seq.runs());
        }
        bounds.push(runs.len());
        let total = runs.len();
        let width = params.max_pattern_runs.saturating_sub(1);
        if total.saturating_mul(width.max(1)) >= NO_PATTERN as usize {
            return Err(Error::InvalidArgument(format!("corpus of {total} runs is too large")));
        }

        // Windows are interned as trie paths, (prefix id, next run) -> id, so
        // each window costs one small hash. Interning in offset order makes
        // ids, and so the build, deterministic. Id 0 is the empty prefix;
        // single runs get ids too but never become candidates.
        let mut windows = vec![NO_PATTERN; total * width];
        let mut first: Vec<(u32, u8)> = vec![(0, 0)];
        let mut counts: Vec<u64> = vec![0];
        let mut positions: Vec<Vec<u32>> = vec![Vec::new()];
        let mut free: Vec<usize> = vec![0];
        {
            let mut ids: FxHashMap<(u32, Run), u32> = FxHashMap::default();
            for b in bounds.windows(2) {
                for p in b[0]..b[1] {
                    let mut prefix = 0u32;
                    for l in 1..=params.max_pattern_runs.min(b[1] - p) {
                        let id = *ids.entry((prefix, runs[p + l - 1])).or_insert_with(|| {
                            first.push((p as u32, l as u8));
                            counts.push(0);
                            positions.push(Vec::new());
                            free.push(0);
                            (first.len() - 1) as u32
                        });
                        prefix = id;
                        if l < 2 {
                            continue;
                        }
                        let i = id as usize;
                        windows[p * width + l - 2] = id;
                        positions[i].push(p as u32);
                        // Windows never span sequences, so one global cursor per
                        // pattern gives per-sequence leftmost counting.
                        if p >= free[i] {
                            counts[i] += 1;
                            free[i] = p + l;
                        }
                    }
                }
            }
        }
        let live: Vec<bool> = counts
            .iter()
            .zip(&first)
            .map(|(&c, &(_, l))| l >= 2 && c >= params.min_frequency)
            .collect();
        for (i, alive) in live.iter().enumerate() {
            if !alive {
                positions[i] = Vec::new();
            }
        }

        let mut builder = CodebookBuilder {
            params,
            runs,
            bounds,
            consumed: vec![false; total],
            placed: HashMap::new(),
            width,
            stamps: vec![0; windows.len()],
            windows,
            first,
            counts,
            live,
            positions,
            heap: BinaryHeap::new(),
            patterns: Vec::new(),
        };
        let heap: Vec<Candidate> = (0..builder.first.len() as u32)
            .filter(|&id| builder.live[id as usize])
            .map(|id| builder.candidate(id))
            .collect();
        builder.heap = heap.into();
        Ok(builder)
    }

    fn value(&self, id: u32) -> &[Run] {
        let (p, l) = self.first[id as usize];
        &self.runs[p as usize..p as usize + l as usize]
    }

    fn candidate(&self, id: u32) -> Candidate {
        let count = self.counts[id as usize];
        let value = self.value(id);
        Candidate {
            key: self.params.score.key(count, value.len()),
            text: Reverse(render_runs(value)),
            count,
            id,
        }
    }

    /// Pattern tokens assigned so far, in id order.
    pub fn patterns(&self) -> &[Vec<Run>] {
        &self.patterns
    }

    fn alive(&self, at: usize, len: usize) -> bool {
        !self.consumed[at..at + len].contains(&true)
    }

    fn window(&self, at: usize, len: usize) -> u32 {
        self.windows[at * self.width + len - 2]
    }

    fn occurs(&self, id: u32, at: usize, len: usize) -> bool {
        self.window(at, len) == id && self.alive(at, len)
    }

    /// Live occurrences of pattern `id` chained to the one at `at` by overlaps, in order.
    fn cluster(&self, id: u32, at: usize, len: usize, out: &mut Vec<usize>) {
        out.clear();
        let mut cur = at;
        while let Some(q) = (cur.saturating_sub(len - 1)..cur).rev().find(|&q| self.occurs(id, q, len)) {
            out.push(q);
            cur = q;
        }
        out.reverse();
        out.push(at);
        cur = at;
        let end = self.runs.len();
        while let Some(q) = (cur + 1..(cur + len).min(end + 1 - len)).find(|&q| self.occurs(id, q, len)) {
            out.push(q);
            cur = q;
        }
    }

    /// Performs one substitution round; returns the new token id, or `None`
    /// once no pattern qualifies or the vocabulary cap is reached.
    pub fn step(&mut self) -> Option<TokenId> {
        if self.patterns.len() >= self.params.max_vocab {
            return None;
        }
        // Heap entries may hold stale, higher counts. Since counts only fall,
        // the first entry popped with a current count is the true best.
        let chosen = loop {
            let mut candidate = self.heap.pop()?;
            let i = candidate.id as usize;
            if !self.live[i] || self.counts[i] < self.params.min_frequency {
                continue;
            }
            if self.counts[i] == candidate.count {
                break candidate.id;
            }
            candidate.count = self.counts[i];
            candidate.key = self.params.score.key(candidate.count, self.first[i].1 as usize);
            self.heap.push(candidate);
        };
        let token = self.patterns.len() as TokenId;
        let stamp = token + 1;
        self.patterns.push(self.value(chosen).to_vec());
        self.live[chosen as usize] = false;
        let len = self.first[chosen as usize].1 as usize;

        let mut spans = Vec::new();
        let mut free = 0;
        for p in std::mem::take(&mut self.positions[chosen as usize]) {
            let p = p as usize;
            if p >= free && self.alive(p, len) {
                spans.push(p);
                free = p + len;
            }
        }

        // Every occurrence that dies overlaps a span; recount its cluster.
        // Touched clusters are kept flat as (id, len, before, start, end) into `occ`.
        let mut occ: Vec<usize> = Vec::new();
        let mut touched: Vec<(u32, usize, u64, usize, usize)> = Vec::new();
        let mut cluster = Vec::new();
        for &s in &spans {
            for l in 2..=self.params.max_pattern_runs {
                for p in (s + 1).saturating_sub(l)..(s + len).min((self.runs.len() + 1).saturating_sub(l)) {
                    let id = self.window(p, l);
                    let slot = p * self.width + l - 2;
                    if id == NO_PATTERN || !self.live[id as usize] || self.stamps[slot] == stamp || !self.alive(p, l) {
                        continue;
                    }
                    self.cluster(id, p, l, &mut cluster);
                    for &q in &cluster {
                        self.stamps[q * self.width + l - 2] = stamp;
                    }
                    let before = greedy_count(cluster.iter().copied(), l);
                    touched.push((id, l, before, occ.len(), occ.len() + cluster.len()));
                    occ.extend_from_slice(&cluster);
                }
            }
        }

        for &s in &spans {
            self.consumed[s..s + len].fill(true);
            self.placed.insert(s, token);
        }
        for (id, l, before, start, end) in touched {
            let after = greedy_count(occ[start..end].iter().copied().filter(|&q| self.alive(q, l)), l);
            self.counts[id as usize] = self.counts[id as usize] + after - before;
        }
        Some(token)
    }

    /// Runs substitution rounds until none qualifies.
    pub fn run(&mut self) {
        while self.step().is_some() {}
    }

    /// Expands the working corpus back to runs. Equals the input corpus at
    /// every stage of building.
    pub fn expand_corpus(&self) -> Vec<RleSequence> {
        self.bounds
            .windows(2)
            .map(|b| {
                let mut runs = Vec::with_capacity(b[1] - b[0]);
                let mut p = b[0];
                while p < b[1] {
                    if let Some(&t) = self.placed.get(&p) {
                        let value = &self.patterns[t as usize];
                        runs.extend_from_slice(value);
                        p += value.len();
                    } else {
                        debug_assert!(!self.consumed[p]);
                        runs.push(self.runs[p]);
                        p += 1;
                    }
                }
                RleSequence::from_runs(runs).expect("corpus runs are valid")
            })
            .collect()
    }

    /// Completes the codebook: pattern tokens first, then one singleton per
    /// distinct leftover run, ordered by (rep, value).
    pub fn finish(self, strategy: TraversalStrategy) -> Codebook {
        let mut singles: Vec<Run> = self
            .runs
            .iter()
            .zip(&self.consumed)
            .filter(|(_, &c)| !c)
            .map(|(r, _)| *r)
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        singles.sort_unstable();
        let mut values = self.patterns;
        values.extend(singles.into_iter().map(|r| vec![r]));
        Codebook::new(strategy, self.params, values).expect("built token values are distinct")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rle::Run;

    fn seq(text: &str) -> RleSequence {
        parse_rle(text).unwrap()
    }

    fn params(min_frequency: u64, max_pattern_runs: usize) -> BuildParams {
        BuildParams {
            min_frequency,
            max_pattern_runs,
            ..BuildParams::default()
        }
    }

    #[test]
    fn worked_micro_corpus() {
        let corpus = [seq("2E3F2E3F1E")];
        let book = build_codebook(&corpus, TraversalStrategy::Snake, params(2, 2)).unwrap();
        let values: Vec<_> = book.values().map(|(_, v)| render_runs(v)).collect();
        assert_eq!(values, ["2E3F", "1E"]);
        let tokens = book.tokenize(&corpus[0]).unwrap();
        assert_eq!(tokens, [0, 0, 1]);
        assert_eq!(book.detokenize(&tokens).unwrap(), corpus[0]);
    }

    #[test]
    fn nothing_repeats() {
        let corpus = [seq("3E2F1E")];
        let book = build_codebook(&corpus, TraversalStrategy::Snake, BuildParams::default()).unwrap();
        let values: Vec<_> = book.values().map(|(_, v)| render_runs(v)).collect();
        assert_eq!(values, ["1E", "2F", "3E"]);
    }

    #[test]
    fn table_style_values() {
        let corpus = [
            seq("2E3F1E7F1022E10F5E"),
            seq("1022E10F5E9F2E3F1E"),
        ];
        let book = build_codebook(&corpus, TraversalStrategy::Snake, params(2, 3)).unwrap();
        assert!(book.lookup(seq("2E 3F 1E").runs()).is_some());
        assert!(book.lookup(seq("1022E 10F 5E").runs()).is_some());
        for s in &corpus {
            assert_eq!(&book.detokenize(&book.tokenize(s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn invalid_params_and_corpus() {
        let corpus = [seq("1E")];
        assert!(build_codebook(&[], TraversalStrategy::Snake, BuildParams::default()).is_err());
        assert!(build_codebook(&corpus, TraversalStrategy::Snake, params(1, 2)).is_err());
        assert!(build_codebook(&corpus, TraversalStrategy::Snake, params(2, 0)).is_err());
        assert!(build_codebook(&[RleSequence::default()], TraversalStrategy::Snake, params(2, 2)).is_err());
    }

    #[test]
    fn tokenize_errors() {
        let book = build_codebook(&[seq("2E3F2E3F1E")], TraversalStrategy::Snake, params(2, 2)).unwrap();
        assert_eq!(book.tokenize(&seq("2E3F")).unwrap(), [0]);
        match book.tokenize(&seq("2E3F7E")) {
            Err(Error::OutOfVocabulary { run, position }) => {
                assert_eq!(run, Run::empty(7));
                assert_eq!(position, 2);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(book.detokenize(&[5]), Err(Error::InvalidToken { id: 5, .. })));
        assert!(book.detokenize(&[]).is_err());
        assert_eq!(book.detokenize(&[1]).unwrap(), seq("1E"));
    }

    #[test]
    fn tokenize_backs_off_when_greedy_gets_stuck() {
        // "1E2F" and "2F3E" are tokens but "3E" alone is not.
        let book = Codebook::new(
            TraversalStrategy::Snake,
            BuildParams::default(),
            vec![seq("1E2F").into_runs(), seq("2F3E").into_runs(), vec![Run::empty(1)]],
        )
        .unwrap();
        assert_eq!(book.tokenize(&seq("1E2F3E")).unwrap(), [2, 1]);
        assert_eq!(book.tokenize(&seq("1E2F")).unwrap(), [0]);
    }

    #[test]
    fn save_load() {
        let book = build_codebook(&[seq("2E3F2E3F1E")], TraversalStrategy::Spiral, params(2, 2)).unwrap();
        let bytes = save_codebook(&book);
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            "{\"version\":1,\"strategy\":\"spiral\",\"params\":{\"min_frequency\":2,\"max_pattern_runs\":2,\"max_vocab\":4096},\"tokens\":[{\"id\":0,\"value\":\"2E3F\"},{\"id\":1,\"value\":\"1E\"}]}\n"
        );
        let loaded = load_codebook(&bytes).unwrap();
        assert_eq!(loaded, book);
        assert_eq!(loaded.id(), book.id());
        assert_eq!(book.id(), format!("{:016x}", fnv1a64(&bytes)));
    }

    #[test]
    fn load_rejects_bad_files() {
        let good = "{\"version\":1,\"strategy\":\"snake\",\"params\":{\"min_frequency\":2,\"max_pattern_runs\":8,\"max_vocab\":4096},\"tokens\":[{\"id\":0,\"value\":\"2E3F\"},{\"id\":1,\"value\":\"1E\"}]}";
        assert!(load_codebook(good.as_bytes()).is_ok());
        let cases = [
            good.replace("\"version\":1", "\"version\":2"),
            good.replace("\"id\":1", "\"id\":2"),
            good.replace("\"1E\"", "\"2E3F\""),
            good.replace("\"1E\"", "\"1X\""),
            good.replace("\"1E\"", "\"\""),
            good.replace("snake", "zigzag"),
            good.replace("\"min_frequency\":2", "\"min_frequency\":1"),
            good[..good.len() - 3].to_string(),
        ];
        for case in cases {
            assert!(matches!(load_codebook(case.as_bytes()), Err(Error::Format(_))), "{case}");
        }
    }

    #[test]
    fn non_default_score_is_saved() {
        let p = BuildParams {
            score: ScoreRule::LongestFirst,
            ..BuildParams::default()
        };
        let book = build_codebook(&[seq("1E2F3E1E2F3E")], TraversalStrategy::Snake, p).unwrap();
        let text = String::from_utf8(book.to_bytes()).unwrap();
        assert!(text.contains("\"score\":\"longest_first\""));
        assert_eq!(load_codebook(text.as_bytes()).unwrap(), book);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }
}
