//! Diversity-driven document selection.
//!
//! [`heuristic_sample`] grows a working corpus `W`, starting from the
//! initial counts, by greedy windows:
//!
//! 1. Scan candidates in order. A candidate *qualifies* when adding it would
//!    raise the entropy of `W` (every candidate qualifies while `W` is empty).
//! 2. Track the qualifying candidate with the highest resulting entropy; on
//!    ties within [`TIE_TOLERANCE`] the earlier one wins.
//! 3. After `e` qualifying candidates, commit the best one and start a new
//!    window at the next unread candidate. If the stream ends mid-window the
//!    best candidate seen so far is still committed.
//! 4. Stop as soon as `W` holds at least `S` tokens. When the stream runs
//!    out, move on to the next (smaller) exhaustivity level and rescan the
//!    not-yet-selected candidates from the beginning.
//!
//! [`random_sample`] and [`optimal_sample_bruteforce`] are the reference
//! arms used to evaluate it.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::corpus::{random_subset, NormalizedDocument, SeededRng};
use crate::counts::CategoryCounts;
use crate::entropy::{AlphaOrder, EntropyAccumulator};
use crate::error::{Error, Result};

/// Minimum entropy increase for a candidate to qualify. Absorbs rounding
/// noise, e.g. a document that exactly doubles the current distribution.
pub const GAIN_THRESHOLD: f64 = 1e-12;

/// Candidates whose resulting entropies differ by less than this are tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub const MAX_BRUTEFORCE_CANDIDATES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Target size `S` of the working corpus, in tokens.
    pub target_size: u64,
    /// Exhaustivity levels, strictly decreasing, last one ≥ 1.
    pub exhaustivity: Vec<usize>,
    /// Order of the entropy being maximized.
    pub alpha: AlphaOrder,
    /// Shuffles the candidate order before scanning when set.
    pub seed: Option<u64>,
    /// Worker threads for candidate evaluation; results do not depend on it.
    pub threads: usize,
}

impl SamplerConfig {
    pub const DEFAULT_EXHAUSTIVITY: [usize; 4] = [1000, 100, 10, 1];

    pub fn new(target_size: u64) -> Self {
        SamplerConfig {
            target_size,
            exhaustivity: Self::DEFAULT_EXHAUSTIVITY.to_vec(),
            alpha: AlphaOrder::SHANNON,
            seed: None,
            threads: 1,
        }
    }

    pub fn with_exhaustivity(mut self, levels: impl Into<Vec<usize>>) -> Self {
        self.exhaustivity = levels.into();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.target_size == 0 {
            return Err(Error::Config("target size must be positive".into()));
        }
        if self.exhaustivity.is_empty() {
            return Err(Error::Config("exhaustivity schedule is empty".into()));
        }
        if self.exhaustivity.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Config(
                "exhaustivity schedule must be strictly decreasing".into(),
            ));
        }
        if self.exhaustivity.last() == Some(&0) {
            return Err(Error::Config("exhaustivity levels must be ≥ 1".into()));
        }
        if self.threads == 0 {
            return Err(Error::Config("threads must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub doc_id: String,
    /// Tokens in the working corpus after the commit.
    pub tokens_total: u64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub selected: Vec<String>,
    /// Entropy of the final working corpus; `None` if it is empty.
    pub final_entropy: Option<f64>,
    pub tokens_total: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub reached_target: bool,
    /// `(e, commits made at that level)` for every level visited.
    pub exhaustivity_used: Vec<(usize, usize)>,
}

impl SampleResult {
    /// Rebuilds the working corpus from `initial` and the selected ids.
    pub fn replay(
        &self,
        initial: &CategoryCounts,
        candidates: &[NormalizedDocument],
    ) -> Result<CategoryCounts> {
        let by_id: HashMap<&str, &NormalizedDocument> =
            candidates.iter().map(|d| (d.id.as_str(), d)).collect();
        let mut counts = initial.clone();
        for id in &self.selected {
            let doc = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::Domain(format!("unknown document id `{id}`")))?;
            counts.merge_from(&doc.counts);
        }
        Ok(counts)
    }

    /// CSV with columns `commit_index,doc_id,tokens_total,entropy`.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("commit_index,doc_id,tokens_total,entropy\n");
        for (i, p) in self.trajectory.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                csv_field(&p.doc_id),
                p.tokens_total,
                p.entropy
            ));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct Window {
    best: Option<(usize, f64)>,
    qualifying: usize,
}

/// Entropy of `W ∪ doc` when the document qualifies, `None` otherwise.
fn score(
    acc: &EntropyAccumulator,
    current: Option<f64>,
    doc: &NormalizedDocument,
    alpha: AlphaOrder,
) -> Result<Option<f64>> {
    if doc.counts.is_empty() {
        return Ok(None);
    }
    let after = acc.entropy_after(&doc.counts, alpha)?;
    Ok(match current {
        None => Some(after),
        Some(h) if after - h > GAIN_THRESHOLD => Some(after),
        Some(_) => None,
    })
}

/// Greedy exhaustivity-scheduled selection; see the module docs.
pub fn heuristic_sample(
    initial: &CategoryCounts,
    candidates: &[NormalizedDocument],
    config: &SamplerConfig,
) -> Result<SampleResult> {
    config.validate()?;
    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?,
        )
    } else {
        None
    };

    let alpha = config.alpha;
    let mut acc = EntropyAccumulator::from_counts(initial, &[alpha]);

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    if let Some(seed) = config.seed {
        SeededRng::new(seed).shuffle(&mut order);
    }
    let mut taken = vec![false; candidates.len()];
    let mut result = SampleResult {
        selected: Vec::new(),
        final_entropy: None,
        tokens_total: acc.total(),
        trajectory: Vec::new(),
        reached_target: acc.total() >= config.target_size,
        exhaustivity_used: Vec::new(),
    };
    let chunk = (64 * config.threads).max(64);
    let mut scores: Vec<(usize, Option<f64>)> = Vec::with_capacity(chunk);

    'levels: for &e in &config.exhaustivity {
        if result.reached_target {
            break;
        }
        let mut commits = 0usize;
        let mut pos = 0usize;
        while pos < order.len() {
            let current = if acc.is_empty() {
                None
            } else {
                Some(acc.entropy(alpha)?)
            };
            let mut window = Window {
                best: None,
                qualifying: 0,
            };
            // evaluate ahead in chunks, consume in stream order
            'scan: while pos < order.len() && window.qualifying < e {
                let ids: Vec<usize> = order[pos..]
                    .iter()
                    .copied()
                    .filter(|&i| !taken[i])
                    .take(chunk)
                    .collect();
                let end_pos = match ids.last() {
                    Some(&last) => pos + order[pos..].iter().position(|&i| i == last).unwrap() + 1,
                    None => order.len(),
                };
                let eval = |&i: &usize| score(&acc, current, &candidates[i], alpha).map(|s| (i, s));
                scores.clear();
                match &pool {
                    Some(pool) => {
                        let out: Result<Vec<_>> =
                            pool.install(|| ids.par_iter().map(eval).collect());
                        scores.extend(out?);
                    }
                    None => {
                        for i in &ids {
                            scores.push(eval(i)?);
                        }
                    }
                }
                for &(i, s) in &scores {
                    if let Some(s) = s {
                        window.qualifying += 1;
                        let better = match window.best {
                            None => true,
                            Some((_, b)) => s > b + TIE_TOLERANCE,
                        };
                        if better {
                            window.best = Some((i, s));
                        }
                        if window.qualifying == e {
                            pos = order[pos..].iter().position(|&j| j == i).unwrap() + pos + 1;
                            break 'scan;
                        }
                    }
                }
                pos = end_pos;
            }
            let Some((best, _)) = window.best else {
                break;
            };
            let doc = &candidates[best];
            acc.apply_delta(&doc.counts)?;
            taken[best] = true;
            commits += 1;
            let entropy = acc.entropy(alpha)?;
            result.selected.push(doc.id.clone());
            result.trajectory.push(TrajectoryPoint {
                doc_id: doc.id.clone(),
                tokens_total: acc.total(),
                entropy,
            });
            if acc.total() >= config.target_size {
                result.reached_target = true;
                result.exhaustivity_used.push((e, commits));
                break 'levels;
            }
        }
        result.exhaustivity_used.push((e, commits));
    }

    result.tokens_total = acc.total();
    result.final_entropy = if acc.is_empty() {
        None
    } else {
        Some(acc.entropy(alpha)?)
    };
    Ok(result)
}

/// Random baseline: documents in seeded shuffled order until the working
/// corpus holds at least `target_size` tokens. Reports Shannon entropy.
pub fn random_sample(
    initial: &CategoryCounts,
    candidates: &[NormalizedDocument],
    target_size: u64,
    seed: u64,
) -> Result<SampleResult> {
    if target_size == 0 {
        return Err(Error::Config("target size must be positive".into()));
    }
    let alpha = AlphaOrder::SHANNON;
    let mut acc = EntropyAccumulator::from_counts(initial, &[]);
    let mut result = SampleResult {
        selected: Vec::new(),
        final_entropy: None,
        tokens_total: acc.total(),
        trajectory: Vec::new(),
        reached_target: acc.total() >= target_size,
        exhaustivity_used: Vec::new(),
    };
    if !result.reached_target {
        let subset = random_subset(candidates, target_size - acc.total(), seed)?;
        for i in subset.indices {
            let doc = &candidates[i];
            if !doc.counts.is_empty() {
                acc.apply_delta(&doc.counts)?;
            }
            result.selected.push(doc.id.clone());
            if !acc.is_empty() {
                result.trajectory.push(TrajectoryPoint {
                    doc_id: doc.id.clone(),
                    tokens_total: acc.total(),
                    entropy: acc.entropy(alpha)?,
                });
            }
        }
        result.reached_target = acc.total() >= target_size;
    }
    result.tokens_total = acc.total();
    result.final_entropy = if acc.is_empty() {
        None
    } else {
        Some(acc.entropy(alpha)?)
    };
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSample {
    /// Indices into the candidate slice, ascending.
    pub indices: Vec<usize>,
    pub ids: Vec<String>,
    pub entropy: f64,
    pub tokens_total: u64,
    /// False when no subset reaches the target; the full set is returned.
    pub reached_target: bool,
}

/// Exhaustive search over every subset of at most
/// [`MAX_BRUTEFORCE_CANDIDATES`] candidates.
///
/// Among subsets whose working corpus reaches `target_size` tokens, returns
/// the one with maximal entropy; ties go to fewer tokens, then to the
/// lexicographically smaller sorted id list.
pub fn optimal_sample_bruteforce(
    initial: &CategoryCounts,
    candidates: &[NormalizedDocument],
    target_size: u64,
    alpha: AlphaOrder,
) -> Result<OptimalSample> {
    let n = candidates.len();
    if n > MAX_BRUTEFORCE_CANDIDATES {
        return Err(Error::Config(format!(
            "brute force is limited to {MAX_BRUTEFORCE_CANDIDATES} candidates, got {n}"
        )));
    }

    // dense category ids shared by the initial corpus and all candidates
    let mut dict: HashMap<&[u8], usize> = HashMap::new();
    let base: Vec<(usize, u64)> = initial
        .iter()
        .map(|(k, c)| (intern(&mut dict, k), c))
        .collect();
    let docs: Vec<Vec<(usize, u64)>> = candidates
        .iter()
        .map(|d| {
            d.counts
                .iter()
                .map(|(k, c)| (intern(&mut dict, k), c))
                .collect()
        })
        .collect();
    let doc_tokens: Vec<u64> = candidates.iter().map(|d| d.tokens()).collect();

    let mut counts = vec![0u64; dict.len()];
    for &(id, c) in &base {
        counts[id] += c;
    }
    let mut tokens = initial.total();

    let entropy_of = |counts: &[u64], total: u64| -> f64 {
        let m = total as f64;
        let a = alpha.value();
        if alpha.is_zero() {
            (counts.iter().filter(|&&c| c > 0).count() as f64).ln()
        } else if alpha.is_shannon() {
            -counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / m;
                    p * p.ln()
                })
                .sum::<f64>()
        } else {
            counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| (c as f64 / m).powf(a))
                .sum::<f64>()
                .ln()
                / (1.0 - a)
        }
    };
    let ids_of = |mask: u32| -> Vec<&str> {
        let mut ids: Vec<&str> = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| candidates[i].id.as_str())
            .collect();
        ids.sort_unstable();
        ids
    };

    let mut best: Option<(u32, f64, u64)> = None;
    let mut mask = 0u32;
    // Gray-code walk: each step toggles one document
    for step in 0u64..(1u64 << n) {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            mask ^= 1 << bit;
            let adding = mask >> bit & 1 == 1;
            for &(id, c) in &docs[bit] {
                if adding {
                    counts[id] += c;
                } else {
                    counts[id] -= c;
                }
            }
            if adding {
                tokens += doc_tokens[bit];
            } else {
                tokens -= doc_tokens[bit];
            }
        }
        if tokens == 0 || tokens < target_size {
            continue;
        }
        let h = entropy_of(&counts, tokens);
        let better = match best {
            None => true,
            Some((bm, bh, bt)) => {
                if h > bh + TIE_TOLERANCE {
                    true
                } else if h < bh - TIE_TOLERANCE {
                    false
                } else if tokens != bt {
                    tokens < bt
                } else {
                    ids_of(mask) < ids_of(bm)
                }
            }
        };
        if better {
            best = Some((mask, h, tokens));
        }
    }

    let (mask, reached) = match best {
        Some((mask, _, _)) => (mask, true),
        None => (((1u64 << n) - 1) as u32, false),
    };
    let indices: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
    let mut total = initial.clone();
    for &i in &indices {
        total.merge_from(&candidates[i].counts);
    }
    if total.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    Ok(OptimalSample {
        ids: indices.iter().map(|&i| candidates[i].id.clone()).collect(),
        indices,
        entropy: crate::entropy::renyi_entropy(&total, alpha)?,
        tokens_total: total.total(),
        reached_target: reached,
    })
}

fn intern<'a>(dict: &mut HashMap<&'a [u8], usize>, key: &'a [u8]) -> usize {
    let next = dict.len();
    *dict.entry(key).or_insert(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> NormalizedDocument {
        NormalizedDocument {
            id: id.to_string(),
            counts: text.split_whitespace().collect(),
        }
    }

    /// -Σ p ln p over explicit counts.
    fn h(counts: &[u64]) -> f64 {
        let m: u64 = counts.iter().sum();
        -counts
            .iter()
            .map(|&c| {
                let p = c as f64 / m as f64;
                p * p.ln()
            })
            .sum::<f64>()
    }

    fn three_docs() -> Vec<NormalizedDocument> {
        vec![doc("d1", "a a a"), doc("d2", "b c"), doc("d3", "a b")]
    }

    #[test]
    fn three_document_walkthrough() {
        // window 1 (e=2): d1 -> H{a:3}=0, d2 -> H{b,c}=ln 2; d2 wins
        // window 2: only d3 left unread; H{a:1,b:2,c:1} > ln 2, flushed at stream end
        assert_eq!(h(&[3]), 0.0);
        assert!(h(&[1, 2, 1]) > h(&[1, 1]));
        let config = SamplerConfig::new(4).with_exhaustivity([2]);
        let r = heuristic_sample(&CategoryCounts::new(), &three_docs(), &config).unwrap();
        assert_eq!(r.selected, ["d2", "d3"]);
        assert!(r.reached_target);
        assert_eq!(r.tokens_total, 4);
        assert!((r.final_entropy.unwrap() - h(&[1, 2, 1])).abs() < 1e-12);
        assert_eq!(r.exhaustivity_used, [(2, 2)]);
        assert_eq!(
            r.trajectory_csv(),
            format!(
                "commit_index,doc_id,tokens_total,entropy\n1,d2,2,{}\n2,d3,4,{}\n",
                r.trajectory[0].entropy, r.trajectory[1].entropy
            )
        );
    }

    #[test]
    fn nothing_qualifies_against_single_category() {
        let mut initial = CategoryCounts::new();
        initial.add("a", 5);
        let cands = vec![doc("x", "a a"), doc("y", "a"), doc("z", "a a a a")];
        let config = SamplerConfig::new(100).with_exhaustivity([3, 1]);
        let r = heuristic_sample(&initial, &cands, &config).unwrap();
        assert!(r.selected.is_empty());
        assert!(!r.reached_target);
        assert_eq!(r.final_entropy, Some(0.0));
        assert_eq!(r.exhaustivity_used, [(3, 0), (1, 0)]);
    }

    #[test]
    fn exhaustivity_one_commits_first_positive_candidate() {
        // W = {a:2}; d1 adds nothing new, d2 is the first positive gain,
        // then d3 is positive against {a:2, b:1}, and so on.
        let mut initial = CategoryCounts::new();
        initial.add("a", 2);
        let cands = vec![
            doc("d1", "a"),
            doc("d2", "b"),
            doc("d3", "c c c c c c"),
            doc("d4", "d e"),
        ];
        let config = SamplerConfig::new(100).with_exhaustivity([1]);
        let r = heuristic_sample(&initial, &cands, &config).unwrap();
        // hand simulation
        assert!(h(&[3]) <= h(&[2]));
        assert!(h(&[2, 1]) > h(&[2]));
        assert!(h(&[2, 1, 6]) > h(&[2, 1]));
        assert!(h(&[2, 1, 6, 1, 1]) > h(&[2, 1, 6]));
        // d1 is reconsidered after the stream ends only at a lower level; E=[1] has none
        assert_eq!(r.selected, ["d2", "d3", "d4"]);
        assert!(!r.reached_target);
    }

    #[test]
    fn lower_levels_rescan_from_the_start() {
        // e=3 cannot fill a window of three qualifying docs twice; e=1 picks up the rest
        let cands = vec![
            doc("a", "x y"),
            doc("b", "z"),
            doc("c", "w v u"),
            doc("d", "t"),
        ];
        let config = SamplerConfig::new(7).with_exhaustivity([3, 1]);
        let r = heuristic_sample(&CategoryCounts::new(), &cands, &config).unwrap();
        assert_eq!(r.selected.len(), 4);
        assert!(r.reached_target);
        assert_eq!(r.exhaustivity_used[0].0, 3);
        assert_eq!(r.exhaustivity_used.last().unwrap().0, 1);
    }

    #[test]
    fn target_already_met_selects_nothing() {
        let mut initial = CategoryCounts::new();
        initial.add("a", 10);
        let config = SamplerConfig::new(5).with_exhaustivity([1]);
        let r = heuristic_sample(&initial, &three_docs(), &config).unwrap();
        assert!(r.selected.is_empty());
        assert!(r.reached_target);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let docs = three_docs();
        let empty = CategoryCounts::new();
        for config in [
            SamplerConfig::new(0),
            SamplerConfig::new(4).with_exhaustivity(Vec::new()),
            SamplerConfig::new(4).with_exhaustivity([10, 10]),
            SamplerConfig::new(4).with_exhaustivity([1, 10]),
            SamplerConfig::new(4).with_exhaustivity([0]),
        ] {
            assert!(matches!(
                heuristic_sample(&empty, &docs, &config),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn random_sample_is_deterministic_and_flags_short() {
        let docs = three_docs();
        let a = random_sample(&CategoryCounts::new(), &docs, 3, 5).unwrap();
        let b = random_sample(&CategoryCounts::new(), &docs, 3, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.reached_target);
        let short = random_sample(&CategoryCounts::new(), &docs, 100, 5).unwrap();
        assert!(!short.reached_target);
        assert_eq!(short.selected.len(), 3);
    }

    #[test]
    fn bruteforce_examples() {
        let empty = CategoryCounts::new();
        let one = vec![doc("only", "a b")];
        let r = optimal_sample_bruteforce(&empty, &one, 2, AlphaOrder::SHANNON).unwrap();
        assert_eq!(r.ids, ["only"]);
        assert!(r.reached_target);

        // subsets reaching 4 tokens: {d1,d2}, {d1,d3}, {d2,d3}, {d1,d2,d3}
        let r = optimal_sample_bruteforce(&empty, &three_docs(), 4, AlphaOrder::SHANNON).unwrap();
        let best = [h(&[3, 1, 1]), h(&[4, 1]), h(&[1, 2, 1]), h(&[4, 2, 1])];
        let top = best.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(top, h(&[1, 2, 1]));
        assert_eq!(r.ids, ["d2", "d3"]);
        assert!((r.entropy - top).abs() < 1e-12);

        let r = optimal_sample_bruteforce(&empty, &three_docs(), 100, AlphaOrder::SHANNON).unwrap();
        assert!(!r.reached_target);
        assert_eq!(r.indices, [0, 1, 2]);

        let many: Vec<_> = (0..21).map(|i| doc(&format!("d{i}"), "a")).collect();
        assert!(optimal_sample_bruteforce(&empty, &many, 1, AlphaOrder::SHANNON).is_err());
    }

    #[test]
    fn bruteforce_ties_prefer_fewer_tokens_then_ids() {
        let empty = CategoryCounts::new();
        let docs = vec![doc("b", "x y"), doc("a", "x y"), doc("c", "x x y y")];
        let r = optimal_sample_bruteforce(&empty, &docs, 2, AlphaOrder::SHANNON).unwrap();
        assert_eq!(r.ids, ["a"]);
    }

    fn arb_docs(max: usize) -> impl Strategy<Value = Vec<NormalizedDocument>> {
        proptest::collection::vec(proptest::collection::vec(0u8..12, 1..8), 1..max).prop_map(
            |docs| {
                docs.into_iter()
                    .enumerate()
                    .map(|(i, words)| NormalizedDocument {
                        id: format!("d{i:02}"),
                        counts: words.iter().map(|w| format!("w{w}")).collect(),
                    })
                    .collect()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn heuristic_invariants(docs in arb_docs(40), target in 1u64..80, seed in any::<u64>()) {
            let mut config = SamplerConfig::new(target).with_exhaustivity([5, 2, 1]);
            config.seed = Some(seed);
            let initial: CategoryCounts = ["w0", "w1"].into_iter().collect();
            let r = heuristic_sample(&initial, &docs, &config).unwrap();

            let mut prev = crate::entropy::shannon_entropy(&initial).unwrap();
            for p in &r.trajectory {
                prop_assert!(p.entropy - prev > GAIN_THRESHOLD);
                prev = p.entropy;
            }
            let distinct: std::collections::HashSet<_> = r.selected.iter().collect();
            prop_assert_eq!(distinct.len(), r.selected.len());

            let replayed = r.replay(&initial, &docs).unwrap();
            let h_replay = crate::entropy::shannon_entropy(&replayed).unwrap();
            prop_assert!((h_replay - r.final_entropy.unwrap()).abs() <= 1e-9);
            prop_assert_eq!(replayed.total(), r.tokens_total);

            let mut threaded = config.clone();
            threaded.threads = 3;
            prop_assert_eq!(heuristic_sample(&initial, &docs, &threaded).unwrap(), r);
        }

        #[test]
        fn heuristic_never_beats_the_optimum(docs in arb_docs(12), target in 1u64..30) {
            let empty = CategoryCounts::new();
            let config = SamplerConfig::new(target).with_exhaustivity([3, 1]);
            let r = heuristic_sample(&empty, &docs, &config).unwrap();
            if r.reached_target {
                let opt = optimal_sample_bruteforce(&empty, &docs, target, AlphaOrder::SHANNON)
                    .unwrap();
                prop_assert!(opt.reached_target);
                prop_assert!(r.final_entropy.unwrap() <= opt.entropy + 1e-9);
            }
        }
    }
}
