//! Shannon and Rényi entropies (natural log) over category distributions.
//!
//! [`shannon_entropy`] and [`renyi_entropy`] recompute from scratch using
//! probabilities. [`EntropyAccumulator`] keeps streaming sufficient
//! statistics instead, so that the entropy after a hypothetical addition can
//! be read in time proportional to the size of the addition:
//!
//! ```text
//! H_1 = ln M - (1/M) * sum c ln c
//! H_a = (ln sum c^a - a ln M) / (1 - a)      a != 0, 1
//! H_0 = ln n
//! ```

use std::collections::HashMap;
use std::fmt;

use crate::counts::CategoryCounts;
use crate::error::{Error, Result};

/// Orders closer than this are treated as the same order.
const ALPHA_MATCH_TOL: f64 = 1e-12;

/// A Rényi order `α ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaOrder(f64);

impl AlphaOrder {
    pub const ZERO: AlphaOrder = AlphaOrder(0.0);
    pub const SHANNON: AlphaOrder = AlphaOrder(1.0);
    pub const COLLISION: AlphaOrder = AlphaOrder(2.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(AlphaOrder(value))
        } else {
            Err(Error::InvalidAlpha(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_shannon(self) -> bool {
        self.0 == 1.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    fn matches(self, other: AlphaOrder) -> bool {
        (self.0 - other.0).abs() <= ALPHA_MATCH_TOL
    }
}

impl Default for AlphaOrder {
    fn default() -> Self {
        AlphaOrder::SHANNON
    }
}

impl fmt::Display for AlphaOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<f64> for AlphaOrder {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        AlphaOrder::new(value)
    }
}

/// Evenly spaced orders `0, step, 2*step, ..., max` (inclusive).
///
/// Values are rounded to 9 decimals so that e.g. the 0.1 grid prints as
/// `0.3` rather than `0.30000000000000004`.
pub fn alpha_grid(max: f64, step: f64) -> Result<Vec<AlphaOrder>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Config(format!(
            "alpha step must be positive, got {step}"
        )));
    }
    AlphaOrder::new(max)?;
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|k| AlphaOrder::new((k as f64 * step * 1e9).round() / 1e9))
        .collect()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn c_ln_c(c: u64) -> f64 {
    if c <= 1 {
        0.0
    } else {
        let c = c as f64;
        c * c.ln()
    }
}

/// Shannon entropy `-Σ p ln p`.
pub fn shannon_entropy(counts: &CategoryCounts) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let total = counts.total() as f64;
    let sum: CompensatedSum = counts
        .values()
        .map(|c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .collect();
    // -0.0 for a single category
    Ok((-sum.value()).max(0.0))
}

/// Rényi entropy of order `alpha`; `α = 1` is Shannon and `α = 0` is `ln n`.
pub fn renyi_entropy(counts: &CategoryCounts, alpha: AlphaOrder) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    if alpha.is_shannon() {
        return shannon_entropy(counts);
    }
    if alpha.is_zero() {
        return Ok((counts.variety() as f64).ln());
    }
    let total = counts.total() as f64;
    let a = alpha.value();
    let sum: CompensatedSum = counts
        .values()
        .map(|c| (c as f64 / total).powf(a))
        .collect();
    Ok(sum.value().ln() / (1.0 - a))
}

/// Entropy at several orders of one distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityProfile {
    alphas: Vec<AlphaOrder>,
    values: Vec<f64>,
}

impl DiversityProfile {
    pub fn compute(counts: &CategoryCounts, alphas: &[AlphaOrder]) -> Result<Self> {
        let values = alphas
            .iter()
            .map(|&a| renyi_entropy(counts, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiversityProfile {
            alphas: alphas.to_vec(),
            values,
        })
    }

    pub fn alphas(&self) -> &[AlphaOrder] {
        &self.alphas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AlphaOrder, f64)> + '_ {
        self.alphas.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone)]
struct PowerSum {
    alpha: AlphaOrder,
    sum: CompensatedSum,
}

/// Streaming sufficient statistics for entropy queries.
///
/// Orders 0 and 1 are always available. Any other order must be declared
/// when the accumulator is built; asking for an undeclared order is an
/// error so that [`entropy_gain`](Self::entropy_gain) stays `O(|delta|)`.
///
/// Queries take `&self` and may run concurrently; [`apply_delta`](Self::apply_delta)
/// takes `&mut self`.
#[derive(Debug, Clone)]
pub struct EntropyAccumulator {
    counts: HashMap<Vec<u8>, u64>,
    total: u64,
    sum_c_ln_c: CompensatedSum,
    power_sums: Vec<PowerSum>,
}

impl EntropyAccumulator {
    pub fn new(tracked: &[AlphaOrder]) -> Self {
        let mut power_sums: Vec<PowerSum> = Vec::new();
        for &alpha in tracked {
            if alpha.is_zero() || alpha.is_shannon() {
                continue;
            }
            if power_sums.iter().any(|p| p.alpha.matches(alpha)) {
                continue;
            }
            power_sums.push(PowerSum {
                alpha,
                sum: CompensatedSum::default(),
            });
        }
        EntropyAccumulator {
            counts: HashMap::new(),
            total: 0,
            sum_c_ln_c: CompensatedSum::default(),
            power_sums,
        }
    }

    pub fn from_counts(counts: &CategoryCounts, tracked: &[AlphaOrder]) -> Self {
        let mut acc = EntropyAccumulator::new(tracked);
        acc.counts.reserve(counts.variety());
        for (k, c) in counts.iter() {
            acc.counts.insert(k.to_vec(), c);
            acc.sum_c_ln_c.add(c_ln_c(c));
            for p in &mut acc.power_sums {
                p.sum.add((c as f64).powf(p.alpha.value()));
            }
        }
        acc.total = counts.total();
        acc
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn variety(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, category: impl AsRef<[u8]>) -> u64 {
        self.counts.get(category.as_ref()).copied().unwrap_or(0)
    }

    /// Orders that can be queried, in ascending order.
    pub fn tracked_alphas(&self) -> Vec<AlphaOrder> {
        let mut out = vec![AlphaOrder::ZERO, AlphaOrder::SHANNON];
        out.extend(self.power_sums.iter().map(|p| p.alpha));
        out.sort_by(|a, b| a.value().total_cmp(&b.value()));
        out
    }

    /// Snapshot of the current counts.
    pub fn counts(&self) -> CategoryCounts {
        let mut out = CategoryCounts::new();
        for (k, &c) in &self.counts {
            out.add(k, c);
        }
        out
    }

    fn power_sum_index(&self, alpha: AlphaOrder) -> Result<usize> {
        self.power_sums
            .iter()
            .position(|p| p.alpha.matches(alpha))
            .ok_or(Error::UntrackedAlpha(alpha.value()))
    }

    fn check_alpha(&self, alpha: AlphaOrder) -> Result<Option<usize>> {
        if alpha.is_zero() || alpha.is_shannon() {
            Ok(None)
        } else {
            self.power_sum_index(alpha).map(Some)
        }
    }

    fn evaluate(alpha: AlphaOrder, total: u64, variety: usize, s_ln: f64, power: f64) -> f64 {
        let m = total as f64;
        if alpha.is_zero() {
            (variety as f64).ln()
        } else if alpha.is_shannon() {
            (m.ln() - s_ln / m).max(0.0)
        } else {
            let a = alpha.value();
            (power.ln() - a * m.ln()) / (1.0 - a)
        }
    }

    /// Current entropy of order `alpha`.
    pub fn entropy(&self, alpha: AlphaOrder) -> Result<f64> {
        let idx = self.check_alpha(alpha)?;
        if self.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let power = idx.map_or(0.0, |i| self.power_sums[i].sum.value());
        Ok(Self::evaluate(
            alpha,
            self.total,
            self.counts.len(),
            self.sum_c_ln_c.value(),
            power,
        ))
    }

    /// Entropy the accumulator would have after adding `delta`, without
    /// modifying it. Touches only the categories present in `delta`.
    pub fn entropy_after(&self, delta: &CategoryCounts, alpha: AlphaOrder) -> Result<f64> {
        let idx = self.check_alpha(alpha)?;
        if delta.is_empty() {
            return Err(Error::EmptyDelta);
        }
        let mut s_ln = self.sum_c_ln_c;
        let mut power = idx.map(|i| self.power_sums[i].sum);
        let mut new_categories = 0usize;
        for (k, d) in delta.iter() {
            let c = self.counts.get(k).copied().unwrap_or(0);
            if c == 0 {
                new_categories += 1;
            }
            let n = c + d;
            if alpha.is_shannon() {
                s_ln.add(c_ln_c(n));
                s_ln.add(-c_ln_c(c));
            }
            if let (Some(p), Some(i)) = (power.as_mut(), idx) {
                let a = self.power_sums[i].alpha.value();
                p.add((n as f64).powf(a));
                if c > 0 {
                    p.add(-(c as f64).powf(a));
                }
            }
        }
        Ok(Self::evaluate(
            alpha,
            self.total + delta.total(),
            self.counts.len() + new_categories,
            s_ln.value(),
            power.map_or(0.0, |p| p.value()),
        ))
    }

    /// `H(W ∪ delta) - H(W)`.
    ///
    /// Fails with [`Error::EmptyDistribution`] when the accumulator itself is
    /// empty, since `H(W)` is then undefined.
    pub fn entropy_gain(&self, delta: &CategoryCounts, alpha: AlphaOrder) -> Result<f64> {
        let after = self.entropy_after(delta, alpha)?;
        Ok(after - self.entropy(alpha)?)
    }

    /// Adds `delta` to the counts and updates every tracked statistic.
    pub fn apply_delta(&mut self, delta: &CategoryCounts) -> Result<()> {
        if delta.is_empty() {
            return Err(Error::EmptyDelta);
        }
        for (k, d) in delta.iter() {
            let c = match self.counts.get_mut(k) {
                Some(slot) => {
                    let c = *slot;
                    *slot = c + d;
                    c
                }
                None => {
                    self.counts.insert(k.to_vec(), d);
                    0
                }
            };
            let n = c + d;
            self.sum_c_ln_c.add(c_ln_c(n));
            self.sum_c_ln_c.add(-c_ln_c(c));
            for p in &mut self.power_sums {
                let a = p.alpha.value();
                p.sum.add((n as f64).powf(a));
                if c > 0 {
                    p.sum.add(-(c as f64).powf(a));
                }
            }
        }
        self.total += delta.total();
        Ok(())
    }
}

/// Pointwise sum of two count tables.
pub fn merge(a: &CategoryCounts, b: &CategoryCounts) -> CategoryCounts {
    a.merge(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> CategoryCounts {
        let mut c = CategoryCounts::new();
        for (k, v) in pairs {
            c.add(k, *v);
        }
        c
    }

    fn lvhb_lexical() -> CategoryCounts {
        counts(&[
            (".", 2),
            ("la", 2),
            ("bleue", 1),
            ("brille", 1),
            ("crique", 1),
            ("nage", 1),
            ("pieuvre", 1),
            ("sauvage", 1),
        ])
    }

    fn hvlb_lexical() -> CategoryCounts {
        counts(&[
            ("la", 2),
            (".", 1),
            ("aime", 1),
            ("bleue", 1),
            ("crique", 1),
            ("dans", 1),
            ("eau", 1),
            ("l'", 1),
            ("pieuvre", 1),
        ])
    }

    fn a(v: f64) -> AlphaOrder {
        AlphaOrder::new(v).unwrap()
    }

    /// Textbook route: -Σ p ln p and ln Σ p^α / (1-α), plain loops.
    fn oracle(c: &CategoryCounts, alpha: f64) -> f64 {
        let m = c.total() as f64;
        let ps: Vec<f64> = c.values().map(|v| v as f64 / m).collect();
        if alpha == 1.0 {
            -ps.iter().map(|p| p * p.ln()).sum::<f64>()
        } else {
            ps.iter().map(|p| p.powf(alpha)).sum::<f64>().ln() / (1.0 - alpha)
        }
    }

    // Frozen from the oracle above (exact, not the 3-decimal table values).
    const LVHB_LEX: [f64; 3] = [2.0794415416798357, 2.0253262207700673, 1.9661128563728323];
    const HVLB_LEX: [f64; 3] = [2.1972245773362196, 2.1639556568820564, 2.1202635362000906];

    #[test]
    fn toy_lexical_tables() {
        for (c, expected) in [(lvhb_lexical(), LVHB_LEX), (hvlb_lexical(), HVLB_LEX)] {
            for (i, alpha) in [0.0, 1.0, 2.0].into_iter().enumerate() {
                let h = renyi_entropy(&c, a(alpha)).unwrap();
                assert!((h - expected[i]).abs() < 1e-12, "α={alpha}: {h}");
                assert!((h - oracle(&c, alpha)).abs() < 1e-12);
            }
        }
        // the published three decimals are truncations of these values
        let trunc = |x: f64| (x * 1000.0).floor() / 1000.0;
        assert_eq!(trunc(shannon_entropy(&lvhb_lexical()).unwrap()), 2.025);
        assert_eq!(trunc(shannon_entropy(&hvlb_lexical()).unwrap()), 2.163);
    }

    #[test]
    fn shannon_single_category_is_zero() {
        assert_eq!(shannon_entropy(&counts(&[("x", 7)])).unwrap(), 0.0);
    }

    #[test]
    fn uniform_five_is_ln5_at_every_order() {
        let c = counts(&[("a", 2), ("b", 2), ("c", 2), ("d", 2), ("e", 2)]);
        for alpha in [0.0, 1.0, 2.0] {
            let h = renyi_entropy(&c, a(alpha)).unwrap();
            assert!((h - 5f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_negative_are_errors() {
        let empty = CategoryCounts::new();
        assert!(matches!(
            shannon_entropy(&empty),
            Err(Error::EmptyDistribution)
        ));
        assert!(matches!(
            renyi_entropy(&empty, a(2.0)),
            Err(Error::EmptyDistribution)
        ));
        assert!(matches!(AlphaOrder::new(-0.5), Err(Error::InvalidAlpha(_))));
        assert!(AlphaOrder::new(f64::NAN).is_err());
    }

    #[test]
    fn gain_examples() {
        let acc = EntropyAccumulator::from_counts(&counts(&[("a", 1)]), &[]);
        let g = acc
            .entropy_gain(&counts(&[("b", 1)]), AlphaOrder::SHANNON)
            .unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-15);

        let base = counts(&[("a", 3), ("b", 5), ("c", 1)]);
        let acc = EntropyAccumulator::from_counts(&base, &[]);
        let g = acc.entropy_gain(&base, AlphaOrder::SHANNON).unwrap();
        assert!(g.abs() < 1e-15, "{g}");
    }

    #[test]
    fn gain_rejects_untracked_alpha_and_empty_delta() {
        let acc = EntropyAccumulator::from_counts(&counts(&[("a", 1)]), &[a(2.0)]);
        let delta = counts(&[("b", 1)]);
        assert!(matches!(
            acc.entropy_gain(&delta, a(3.0)),
            Err(Error::UntrackedAlpha(_))
        ));
        assert!(acc.entropy_gain(&delta, a(2.0)).is_ok());
        assert!(acc.entropy_gain(&delta, AlphaOrder::ZERO).is_ok());
        assert!(matches!(
            acc.entropy_gain(&CategoryCounts::new(), AlphaOrder::SHANNON),
            Err(Error::EmptyDelta)
        ));
    }

    #[test]
    fn apply_delta_examples() {
        let mut acc = EntropyAccumulator::new(&[]);
        assert!(matches!(
            acc.apply_delta(&CategoryCounts::new()),
            Err(Error::EmptyDelta)
        ));
        acc.apply_delta(&counts(&[("x", 3)])).unwrap();
        assert_eq!(acc.entropy(AlphaOrder::SHANNON).unwrap(), 0.0);
        assert_eq!(acc.total(), 3);
    }

    #[test]
    fn apply_matches_gain_prediction() {
        let mut acc = EntropyAccumulator::from_counts(&counts(&[("a", 4), ("b", 1)]), &[a(2.0)]);
        let delta = counts(&[("b", 2), ("c", 5)]);
        for alpha in [AlphaOrder::ZERO, AlphaOrder::SHANNON, a(2.0)] {
            let before = acc.entropy(alpha).unwrap();
            let predicted = before + acc.entropy_gain(&delta, alpha).unwrap();
            let mut probe = acc.clone();
            probe.apply_delta(&delta).unwrap();
            assert!((probe.entropy(alpha).unwrap() - predicted).abs() < 1e-12);
        }
        acc.apply_delta(&delta).unwrap();
        assert_eq!(acc.counts(), counts(&[("a", 4), ("b", 3), ("c", 5)]));
    }

    #[test]
    fn merge_of_inverted_skews_is_more_diverse() {
        let x = counts(&[("a", 6), ("b", 4)]);
        let y = counts(&[("a", 4), ("b", 6)]);
        let m = merge(&x, &y);
        assert_eq!(m, counts(&[("a", 10), ("b", 10)]));
        let hm = shannon_entropy(&m).unwrap();
        assert!(hm > shannon_entropy(&x).unwrap());
        assert!(hm > shannon_entropy(&y).unwrap());
        let h0 = renyi_entropy(
            &merge(&counts(&[("a", 1)]), &counts(&[("b", 1)])),
            AlphaOrder::ZERO,
        );
        assert_eq!(h0.unwrap(), 2f64.ln());
    }

    #[test]
    fn grid_has_51_points() {
        let g = alpha_grid(5.0, 0.1).unwrap();
        assert_eq!(g.len(), 51);
        assert_eq!(g[3].value(), 0.3);
        assert_eq!(g[50].value(), 5.0);
        assert!(alpha_grid(5.0, 0.0).is_err());
    }

    fn arb_counts() -> impl Strategy<Value = CategoryCounts> {
        proptest::collection::vec(1u64..500, 1..60).prop_map(|v| {
            let mut c = CategoryCounts::new();
            for (i, n) in v.into_iter().enumerate() {
                c.add(format!("k{i}"), n);
            }
            c
        })
    }

    proptest! {
        #[test]
        fn h0_is_ln_variety(c in arb_counts()) {
            let h = renyi_entropy(&c, AlphaOrder::ZERO).unwrap();
            prop_assert!((h - (c.variety() as f64).ln()).abs() <= 1e-12);
        }

        #[test]
        fn non_increasing_in_alpha(c in arb_counts()) {
            let grid = alpha_grid(5.0, 0.1).unwrap();
            let p = DiversityProfile::compute(&c, &grid).unwrap();
            for w in p.values().windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{} > {}", w[1], w[0]);
            }
        }

        #[test]
        fn continuous_at_one(c in arb_counts()) {
            let h1 = shannon_entropy(&c).unwrap();
            for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
                prop_assert!((renyi_entropy(&c, a(alpha)).unwrap() - h1).abs() < 1e-4);
            }
        }

        #[test]
        fn relabeling_preserves_entropy(c in arb_counts(), alpha in 0.0f64..5.0) {
            let mut relabeled = CategoryCounts::new();
            for (k, v) in c.iter() {
                let mut k2 = k.to_vec();
                k2.reverse();
                k2.push(b'#');
                relabeled.add(k2, v);
            }
            let h = renyi_entropy(&c, a(alpha)).unwrap();
            let h2 = renyi_entropy(&relabeled, a(alpha)).unwrap();
            prop_assert!((h - h2).abs() <= 1e-12 * h.abs().max(1.0));
        }

        #[test]
        fn gain_does_not_mutate(c in arb_counts(), d in arb_counts()) {
            let acc = EntropyAccumulator::from_counts(&c, &[a(2.0)]);
            let g1 = acc.entropy_gain(&d, a(2.0)).unwrap();
            let g2 = acc.entropy_gain(&d, a(2.0)).unwrap();
            prop_assert_eq!(g1.to_bits(), g2.to_bits());
            prop_assert_eq!(acc.counts(), c);
        }
    }
}
