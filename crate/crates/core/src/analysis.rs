//! Statistical evaluation: random baselines, normality and σ-distance,
//! block splitting and lexical/syntactic correlation across α.

use libm::erfc;
use rayon::prelude::*;

use crate::counts::CategoryCounts;
use crate::entropy::{AlphaOrder, DiversityProfile};
use crate::error::{Error, Result};
use crate::syntax::{syntactic_counts, DependencySentence};

/// Smallest sample accepted by [`normality_test`].
pub const MIN_NORMALITY_SAMPLES: usize = 8;

/// A run of consecutive items. Only the last block can be partial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block<'a, T> {
    pub index: usize,
    pub items: &'a [T],
    pub partial: bool,
}

pub fn block_split<T>(items: &[T], block_size: usize) -> Result<Vec<Block<'_, T>>> {
    if block_size == 0 {
        return Err(Error::Domain("block size must be positive".into()));
    }
    Ok(items
        .chunks(block_size)
        .enumerate()
        .map(|(index, items)| Block {
            index,
            items,
            partial: items.len() < block_size,
        })
        .collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityTest {
    /// k² = z_skew² + z_kurt².
    pub statistic: f64,
    pub p_value: f64,
    pub skew_z: f64,
    pub kurtosis_z: f64,
}

/// D'Agostino–Pearson omnibus test (same formulas as `scipy.stats.normaltest`).
pub fn normality_test(samples: &[f64]) -> Result<NormalityTest> {
    let n = samples.len();
    if n < MIN_NORMALITY_SAMPLES {
        return Err(Error::Domain(format!(
            "normality test needs at least {MIN_NORMALITY_SAMPLES} samples, got {n}"
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("normality test on non-finite sample".into()));
    }
    let mu = mean(samples);
    let moment = |k: i32| samples.iter().map(|x| (x - mu).powi(k)).sum::<f64>() / n as f64;
    let m2 = moment(2);
    if m2 == 0.0 || m2 <= f64::EPSILON * mu.abs().powi(2) {
        return Err(Error::Domain(
            "normality test on a zero-variance sample".into(),
        ));
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let nf = n as f64;

    let y = skew * ((nf + 1.0) * (nf + 3.0) / (6.0 * (nf - 2.0))).sqrt();
    let beta2 = 3.0 * (nf * nf + 27.0 * nf - 70.0) * (nf + 1.0) * (nf + 3.0)
        / ((nf - 2.0) * (nf + 5.0) * (nf + 7.0) * (nf + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    let ya = y / alpha;
    let skew_z = delta * (ya + (ya * ya + 1.0).sqrt()).ln();

    let e = 3.0 * (nf - 1.0) / (nf + 1.0);
    let var =
        24.0 * nf * (nf - 2.0) * (nf - 3.0) / ((nf + 1.0) * (nf + 1.0) * (nf + 3.0) * (nf + 5.0));
    let x = (kurt - e) / var.sqrt();
    let sqrt_beta1 = 6.0 * (nf * nf - 5.0 * nf + 2.0) / ((nf + 7.0) * (nf + 9.0))
        * (6.0 * (nf + 3.0) * (nf + 5.0) / (nf * (nf - 2.0) * (nf - 3.0))).sqrt();
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    if denom == 0.0 {
        return Err(Error::Domain(
            "kurtosis transform is undefined for this sample".into(),
        ));
    }
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let kurtosis_z = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();

    let statistic = skew_z * skew_z + kurtosis_z * kurtosis_z;
    // chi-squared survival function with 2 degrees of freedom
    Ok(NormalityTest {
        statistic,
        p_value: (-statistic / 2.0).exp(),
        skew_z,
        kurtosis_z,
    })
}

/// Entropies of seeded random samples, one per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDistribution {
    samples: Vec<f64>,
    mean: f64,
    std_dev: f64,
}

impl BaselineDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < MIN_NORMALITY_SAMPLES {
            return Err(Error::Domain(format!(
                "baseline needs at least {MIN_NORMALITY_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("baseline contains a non-finite value".into()));
        }
        let mean = mean(&samples);
        let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
        let std_dev = (ss / (samples.len() - 1) as f64).sqrt();
        Ok(BaselineDistribution {
            samples,
            mean,
            std_dev,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample standard deviation (n − 1 denominator).
    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    pub fn normality(&self) -> Result<NormalityTest> {
        normality_test(&self.samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaDistance {
    pub value: f64,
    pub sigmas: f64,
    /// Two-sided normal tail probability.
    pub p_value: f64,
    /// Set when the true p is below the smallest positive double; `p_value` is then 0.
    pub underflow: bool,
}

pub fn sigma_distance(value: f64, baseline: &BaselineDistribution) -> Result<SigmaDistance> {
    let sd = baseline.std_dev();
    if sd <= 0.0 {
        return Err(Error::Domain("baseline standard deviation is zero".into()));
    }
    let sigmas = (value - baseline.mean()) / sd;
    let p = erfc(sigmas.abs() / std::f64::consts::SQRT_2);
    let underflow = p < f64::MIN_POSITIVE;
    Ok(SigmaDistance {
        value,
        sigmas,
        p_value: if underflow { 0.0 } else { p.min(1.0) },
        underflow,
    })
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "correlation needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain("correlation needs at least 2 points".into()));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("correlation on non-finite values".into()));
    }
    Ok(())
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Domain("correlation with zero variance".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their rank range.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Lexical (forms) and syntactic (subtrees) profiles of one block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockProfile {
    pub block: usize,
    pub partial: bool,
    pub sentences: usize,
    pub lexical: DiversityProfile,
    pub syntactic: DiversityProfile,
}

/// Form counts of parsed sentences, forms taken as they appear in the treebank.
pub fn form_counts<'a, I>(sentences: I) -> CategoryCounts
where
    I: IntoIterator<Item = &'a DependencySentence>,
{
    sentences.into_iter().flat_map(|s| s.forms()).collect()
}

impl BlockProfile {
    pub fn compute(block: &Block<'_, DependencySentence>, alphas: &[AlphaOrder]) -> Result<Self> {
        let lex = form_counts(block.items);
        let syn = syntactic_counts(block.items);
        Ok(BlockProfile {
            block: block.index,
            partial: block.partial,
            sentences: block.items.len(),
            lexical: DiversityProfile::compute(&lex, alphas)?,
            syntactic: DiversityProfile::compute(&syn, alphas)?,
        })
    }
}

/// Splits the treebank and profiles every block, in parallel, in block order.
pub fn profile_blocks(
    sentences: &[DependencySentence],
    block_size: usize,
    alphas: &[AlphaOrder],
) -> Result<Vec<BlockProfile>> {
    let blocks = block_split(sentences, block_size)?;
    blocks
        .par_iter()
        .map(|b| BlockProfile::compute(b, alphas))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClsdRow {
    pub alpha: AlphaOrder,
    /// `None` when a side is constant across blocks.
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub n_blocks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClsdReport {
    pub rows: Vec<ClsdRow>,
}

/// Correlates lexical against syntactic H_α across blocks, for every α of the
/// profiles' grid. The partial block is left out unless `include_partial`.
pub fn clsd_report(profiles: &[BlockProfile], include_partial: bool) -> Result<ClsdReport> {
    let used: Vec<&BlockProfile> = profiles
        .iter()
        .filter(|p| include_partial || !p.partial)
        .collect();
    if used.len() < 3 {
        return Err(Error::Domain(format!(
            "correlation report needs at least 3 blocks, got {}",
            used.len()
        )));
    }
    let grid = used[0].lexical.alphas();
    if used
        .iter()
        .any(|p| p.lexical.alphas() != grid || p.syntactic.alphas() != grid)
    {
        return Err(Error::Domain("block profiles use different α grids".into()));
    }
    let defined = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let rows = grid
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let lex: Vec<f64> = used.iter().map(|p| p.lexical.values()[i]).collect();
            let syn: Vec<f64> = used.iter().map(|p| p.syntactic.values()[i]).collect();
            Ok(ClsdRow {
                alpha,
                pearson: defined(pearson(&lex, &syn))?,
                spearman: defined(spearman(&lex, &syn))?,
                n_blocks: used.len(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClsdReport { rows })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), |v| v.to_string())
}

impl ClsdReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,pearson,spearman,n_blocks\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.alpha,
                opt(r.pearson),
                opt(r.spearman),
                r.n_blocks
            ));
        }
        out
    }
}

/// Baseline entropies per seed plus summary footer.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub seeds: Vec<u64>,
    pub distribution: BaselineDistribution,
    pub normality: NormalityTest,
}

impl BaselineReport {
    pub fn new(seeds: Vec<u64>, entropies: Vec<f64>) -> Result<Self> {
        if seeds.len() != entropies.len() {
            return Err(Error::Domain("one entropy per seed expected".into()));
        }
        let distribution = BaselineDistribution::new(entropies)?;
        let normality = distribution.normality()?;
        Ok(BaselineReport {
            seeds,
            distribution,
            normality,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,entropy\n");
        for (s, e) in self.seeds.iter().zip(self.distribution.samples()) {
            out.push_str(&format!("{s},{e}\n"));
        }
        out.push_str(&format!("# mean,{}\n", self.distribution.mean()));
        out.push_str(&format!("# std_dev,{}\n", self.distribution.std_dev()));
        out.push_str(&format!(
            "# normality_statistic,{}\n",
            self.normality.statistic
        ));
        out.push_str(&format!("# normality_p,{}\n", self.normality.p_value));
        out
    }
}

impl SigmaDistance {
    pub fn to_csv(&self) -> String {
        format!(
            "value,sigmas,p_value,underflow\n{},{},{},{}\n",
            self.value, self.sigmas, self.p_value, self.underflow
        )
    }
}
