//! Seeded synthetic corpora for tests, benchmarks and desk-scale experiments.
//!
//! Text documents draw forms from a Zipfian vocabulary. Each document also
//! gets its own repetition rate (the chance that a token copies an earlier
//! token of the same document), so documents differ in lexical diversity
//! the way boilerplate-heavy and varied web pages do.

use crate::corpus::{Document, SeededRng};
use crate::error::{Error, Result};
use crate::syntax::{DependencySentence, DependencyToken};

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Pronounceable lowercase form for vocabulary rank `i` (distinct per rank).
pub fn form_name(mut i: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut syllables = Vec::new();
    loop {
        syllables.push(i % base);
        i /= base;
        if i == 0 && syllables.len() >= 2 {
            break;
        }
    }
    let mut out = String::with_capacity(syllables.len() * 2);
    for s in syllables.into_iter().rev() {
        out.push(CONSONANTS[s / VOWELS.len()] as char);
        out.push(VOWELS[s % VOWELS.len()] as char);
    }
    out
}

/// Zipf(s) over ranks `0..size`, sampled by inverse CDF.
#[derive(Debug, Clone)]
pub struct ZipfVocabulary {
    cdf: Vec<f64>,
}

impl ZipfVocabulary {
    pub fn new(size: usize, exponent: f64) -> Result<Self> {
        if size == 0 || !(exponent.is_finite() && exponent >= 0.0) {
            return Err(Error::Config(format!(
                "invalid Zipf vocabulary (size {size}, exponent {exponent})"
            )));
        }
        let mut cdf = Vec::with_capacity(size);
        let mut acc = 0.0;
        for r in 1..=size {
            acc += (r as f64).powf(-exponent);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Ok(ZipfVocabulary { cdf })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let u = rng.next_f64();
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: usize,
    /// Document lengths are uniform in `[mean/2, 3·mean/2]`.
    pub mean_tokens: usize,
    pub vocabulary: usize,
    pub exponent: f64,
    /// Per-document repetition rate is uniform in `[0, max_repetition)`.
    pub max_repetition: f64,
    pub seed: u64,
}

impl Default for SyntheticCorpus {
    fn default() -> Self {
        SyntheticCorpus {
            documents: 5_000,
            mean_tokens: 100,
            vocabulary: 50_000,
            exponent: 1.0,
            max_repetition: 0.6,
            seed: 0,
        }
    }
}

impl SyntheticCorpus {
    pub fn generate(&self) -> Result<Vec<Document>> {
        if self.mean_tokens < 2 || !(0.0..1.0).contains(&self.max_repetition) {
            return Err(Error::Config("invalid synthetic corpus parameters".into()));
        }
        let vocab = ZipfVocabulary::new(self.vocabulary, self.exponent)?;
        let mut rng = SeededRng::new(self.seed);
        let width = self.documents.max(1).to_string().len();
        let lo = self.mean_tokens / 2;
        let span = self.mean_tokens as u64 + 1;
        let mut docs = Vec::with_capacity(self.documents);
        for d in 0..self.documents {
            let len = lo + rng.below(span) as usize;
            let repeat = rng.next_f64() * self.max_repetition;
            let mut ranks: Vec<usize> = Vec::with_capacity(len);
            for _ in 0..len {
                let r = if !ranks.is_empty() && rng.next_f64() < repeat {
                    ranks[rng.below(ranks.len() as u64) as usize]
                } else {
                    vocab.sample(&mut rng)
                };
                ranks.push(r);
            }
            let text = ranks
                .iter()
                .map(|&r| form_name(r))
                .collect::<Vec<_>>()
                .join(" ");
            docs.push(Document {
                id: format!("doc{d:0width$}"),
                text,
                token_count: len as u64,
            });
        }
        Ok(docs)
    }
}

const POS_TAGS: &[&str] = &["D", "N", "V", "A", "P", "ADV", "C", "PRO", "PONCT"];
const RELATIONS: &[&str] = &["det", "suj", "obj", "mod", "dep", "obj.p", "coord", "ponct"];

/// Random dependency trees. `richness` in `(0, 1]` limits the tag, relation
/// and form inventories, so blocks built with different richness differ in
/// both lexical and syntactic diversity.
pub fn synthetic_sentence(
    rng: &mut SeededRng,
    max_len: usize,
    richness: f64,
) -> DependencySentence {
    let keep = |n: usize| ((n as f64 * richness).ceil() as usize).clamp(1, n);
    let n_pos = keep(POS_TAGS.len()) as u64;
    let n_rel = keep(RELATIONS.len()) as u64;
    let n_forms = keep(2_000) as u64;
    let len = 1 + rng.below(max_len.max(1) as u64) as usize;
    let root = 1 + rng.below(len as u64) as usize;
    let mut tokens = Vec::with_capacity(len);
    for i in 1..=len {
        // tokens before the root attach to it, later ones to the root or any earlier token
        let head = if i == root {
            0
        } else if i < root || rng.below(3) == 0 {
            root
        } else {
            1 + rng.below(i as u64 - 1) as usize
        };
        tokens.push(DependencyToken {
            index: i,
            form: form_name(rng.below(n_forms) as usize),
            pos: POS_TAGS[rng.below(n_pos) as usize].to_string(),
            head,
            deprel: if i == root {
                "root".to_string()
            } else {
                RELATIONS[rng.below(n_rel) as usize].to_string()
            },
        });
    }
    DependencySentence::new(tokens).expect("generator builds trees")
}

/// `blocks` consecutive runs of `block_size` sentences; block `b` uses
/// richness drawn once per block.
pub fn synthetic_treebank(blocks: usize, block_size: usize, seed: u64) -> Vec<DependencySentence> {
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::with_capacity(blocks * block_size);
    for _ in 0..blocks {
        let richness = 0.2 + 0.8 * rng.next_f64();
        for _ in 0..block_size {
            out.push(synthetic_sentence(&mut rng, 12, richness));
        }
    }
    out
}
