//! Single-input Mamdani inference with Gaussian sets, min implication, max
//! aggregation and center-of-gravity defuzzification on a uniform grid.
//!
//! Rule bases map an error magnitude to a positive adaptation rate. The
//! outermost antecedents are shoulders by default: membership saturates at 1
//! beyond the lowest and highest antecedent centers, so the output is
//! non-decreasing over the whole input range.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const TRANSLATIONAL: &str = include_str!("../data/fis_translational.json");
const ROTATIONAL: &str = include_str!("../data/fis_rotational.json");

/// Aggregates whose peak falls below this are treated as empty.
pub const DEGENERATE_PEAK: f64 = 1e-12;
pub const MIN_GRID: usize = 101;
/// Consequent samples below this are treated as zero during inference.
const SUPPORT_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("invalid membership function: sigma must be positive and finite, got {0}")]
    InvalidMf(f64),
    #[error("aggregate output set is empty")]
    DegenerateAggregate { fallback: Option<f64> },
    #[error("invalid rule base: {0}")]
    InvalidRuleBase(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shoulder {
    #[default]
    None,
    /// Membership is 1 for every input below the center.
    Left,
    /// Membership is 1 for every input above the center.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMf {
    pub center: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "is_plain")]
    pub shoulder: Shoulder,
}

fn is_plain(s: &Shoulder) -> bool {
    *s == Shoulder::None
}

impl GaussianMf {
    pub fn new(center: f64, sigma: f64) -> Result<Self, FuzzyError> {
        Self::with_shoulder(center, sigma, Shoulder::None)
    }

    pub fn with_shoulder(center: f64, sigma: f64, shoulder: Shoulder) -> Result<Self, FuzzyError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(FuzzyError::InvalidMf(sigma));
        }
        Ok(Self { center, sigma, shoulder })
    }

    #[inline]
    pub fn degree(&self, x: f64) -> f64 {
        match self.shoulder {
            Shoulder::Left if x <= self.center => 1.0,
            Shoulder::Right if x >= self.center => 1.0,
            _ => {
                let z = (x - self.center) / self.sigma;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// `exp(−(x−c)²/(2σ²))`.
pub fn membership(mf: &GaussianMf, x: f64) -> Result<f64, FuzzyError> {
    if !(mf.sigma.is_finite() && mf.sigma > 0.0) {
        return Err(FuzzyError::InvalidMf(mf.sigma));
    }
    Ok(mf.degree(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub antecedent: GaussianMf,
    pub consequent: GaussianMf,
}

/// Centroid `Σ y·μ / Σ μ` of a membership sampled on a uniform grid.
pub fn cog_defuzz(ys: &[f64], mu: &[f64]) -> Result<f64, FuzzyError> {
    let (mut num, mut den, mut peak) = (0.0, 0.0, 0.0_f64);
    for (y, m) in ys.iter().zip(mu) {
        num += y * m;
        den += m;
        peak = peak.max(*m);
    }
    if !(peak >= DEGENERATE_PEAK) {
        return Err(FuzzyError::DegenerateAggregate { fallback: None });
    }
    Ok(num / den)
}

/// Immutable rule base with the consequent sets pre-sampled on the output grid.
#[derive(Debug, Clone)]
pub struct RuleBase {
    rules: Vec<FuzzyRule>,
    universe: (f64, f64),
    ys: Vec<f64>,
    /// `samples[j * grid + k]` is consequent `j` evaluated at `ys[k]`.
    samples: Vec<f64>,
    /// Half-open grid range where consequent `j` exceeds the support floor.
    support: Vec<(usize, usize)>,
}

impl RuleBase {
    pub fn new(rules: Vec<FuzzyRule>, universe: (f64, f64), grid: usize) -> Result<Self, FuzzyError> {
        let (lo, hi) = universe;
        if rules.is_empty() {
            return Err(FuzzyError::InvalidRuleBase("at least one rule is required".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(FuzzyError::InvalidRuleBase(format!("output universe [{lo}, {hi}] is empty")));
        }
        if grid < MIN_GRID {
            return Err(FuzzyError::InvalidRuleBase(format!("grid must have at least {MIN_GRID} points, got {grid}")));
        }
        for (i, rule) in rules.iter().enumerate() {
            for mf in [&rule.antecedent, &rule.consequent] {
                membership(mf, 0.0)?;
                if !mf.center.is_finite() {
                    return Err(FuzzyError::InvalidRuleBase(format!("rule {i}: non-finite center")));
                }
            }
            let c = rule.consequent.center;
            if !(c > 0.0 && c >= lo && c <= hi) {
                return Err(FuzzyError::InvalidRuleBase(format!(
                    "rule {i}: consequent center {c} must be positive and inside [{lo}, {hi}]"
                )));
            }
        }
        let step = (hi - lo) / (grid - 1) as f64;
        let ys: Vec<f64> = (0..grid).map(|k| lo + step * k as f64).collect();
        let samples = rules
            .iter()
            .flat_map(|r| ys.iter().map(move |&y| r.consequent.degree(y)))
            .collect::<Vec<f64>>();
        let support = samples
            .chunks_exact(grid)
            .map(|row| {
                let a = row.iter().position(|v| *v > SUPPORT_FLOOR).unwrap_or(0);
                let b = row.iter().rposition(|v| *v > SUPPORT_FLOOR).map_or(0, |b| b + 1);
                (a, b.max(a))
            })
            .collect();
        Ok(Self { rules, universe, ys, samples, support })
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn universe(&self) -> (f64, f64) {
        self.universe
    }

    pub fn grid(&self) -> usize {
        self.ys.len()
    }

    /// Same rules and universe on a different output grid.
    pub fn with_grid(&self, grid: usize) -> Result<Self, FuzzyError> {
        Self::new(self.rules.clone(), self.universe, grid)
    }

    /// Mamdani inference at input `x`.
    pub fn infer(&self, x: f64) -> Result<f64, FuzzyError> {
        const CHUNK: usize = 64;
        let grid = self.ys.len();
        let firing: Vec<f64> = self.rules.iter().map(|r| r.antecedent.degree(x)).collect();
        // four partial sums break the dependency chain of the quadrature
        let (mut num, mut den, mut peak) = ([0.0_f64; 4], [0.0_f64; 4], [0.0_f64; 4]);
        let mut mu = [0.0_f64; CHUNK];
        for start in (0..grid).step_by(CHUNK) {
            let len = CHUNK.min(grid - start);
            let mu = &mut mu[..len];
            mu.fill(0.0);
            for (j, h) in firing.iter().enumerate() {
                let (a, b) = self.support[j];
                let (a, b) = (a.max(start), b.min(start + len));
                if a >= b {
                    continue;
                }
                let row = &self.samples[j * grid + a..j * grid + b];
                // plain comparisons let the loop vectorize; no NaN can occur here
                for (m, &s) in mu[a - start..b - start].iter_mut().zip(row) {
                    let v = if s < *h { s } else { *h };
                    *m = if *m > v { *m } else { v };
                }
            }
            for (m, y) in mu.chunks(4).zip(self.ys[start..start + len].chunks(4)) {
                for i in 0..m.len() {
                    num[i] += y[i] * m[i];
                    den[i] += m[i];
                    peak[i] = if peak[i] > m[i] { peak[i] } else { m[i] };
                }
            }
        }
        let num: f64 = num.iter().sum();
        let den: f64 = den.iter().sum();
        let peak = peak.iter().fold(0.0_f64, |a, b| a.max(*b));
        if !(peak >= DEGENERATE_PEAK) {
            return Err(FuzzyError::DegenerateAggregate { fallback: Some(self.fallback(x)) });
        }
        Ok(num / den)
    }

    /// Consequent center of the rule whose antecedent center is nearest to `x`.
    pub fn fallback(&self, x: f64) -> f64 {
        self.rules
            .iter()
            .min_by(|a, b| {
                let da = (a.antecedent.center - x).abs();
                let db = (b.antecedent.center - x).abs();
                da.total_cmp(&db).then(a.antecedent.center.total_cmp(&b.antecedent.center))
            })
            .map(|r| r.consequent.center)
            .expect("rule base is never empty")
    }

    /// Inference that never fails: degenerate aggregates yield the fallback.
    pub fn rate(&self, x: f64) -> f64 {
        match self.infer(x) {
            Ok(v) => v,
            Err(FuzzyError::DegenerateAggregate { fallback: Some(f) }) => f,
            Err(_) => self.fallback(x),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FuzzyError> {
        let spec: RuleBaseSpec =
            serde_json::from_str(text).map_err(|e| FuzzyError::InvalidRuleBase(e.to_string()))?;
        spec.build()
    }

    pub fn translational() -> Self {
        Self::from_json(TRANSLATIONAL).expect("bundled rule base is valid")
    }

    pub fn rotational() -> Self {
        Self::from_json(ROTATIONAL).expect("bundled rule base is valid")
    }
}

/// Translational (surge, sway, heave) and rotational (roll, pitch, yaw) rule
/// bases shipped in `data/`.
pub fn default_rulebases() -> (RuleBase, RuleBase) {
    (RuleBase::translational(), RuleBase::rotational())
}

/// Membership function as written in a rule-base document; a missing `sigma`
/// is filled in from the neighbouring centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfSpec {
    pub center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shoulder: Option<Shoulder>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub antecedent: MfSpec,
    pub consequent: MfSpec,
}

/// JSON rule-base document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleBaseSpec {
    pub rules: Vec<RuleSpec>,
    pub output_universe: [f64; 2],
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Membership level at which neighbouring antecedents intersect when
    /// their widths are derived.
    #[serde(default = "default_crossing")]
    pub crossing: f64,
    /// Derived consequent width as a fraction of the consequent center.
    #[serde(default = "default_consequent_width")]
    pub consequent_width: f64,
    /// Turn the lowest and highest antecedents into shoulders.
    #[serde(default = "default_shoulders")]
    pub shoulders: bool,
}

fn default_grid() -> usize {
    1001
}
fn default_crossing() -> f64 {
    0.2
}
fn default_consequent_width() -> f64 {
    0.1
}
fn default_shoulders() -> bool {
    true
}

impl RuleBaseSpec {
    pub fn build(&self) -> Result<RuleBase, FuzzyError> {
        if !(self.crossing > 0.0 && self.crossing < 1.0) {
            return Err(FuzzyError::InvalidRuleBase(format!("crossing must lie in (0, 1), got {}", self.crossing)));
        }
        if !(self.consequent_width > 0.0) {
            return Err(FuzzyError::InvalidRuleBase("consequent_width must be positive".into()));
        }
        let centers: Vec<f64> = self.rules.iter().map(|r| r.antecedent.center).collect();
        let lowest = centers.iter().copied().fold(f64::INFINITY, f64::min);
        let highest = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // two-sided distance to the crossing point of equal Gaussians
        let spread = 2.0 * (2.0 * (1.0 / self.crossing).ln()).sqrt();
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let c = r.antecedent.center;
                let sigma = match r.antecedent.sigma {
                    Some(s) => s,
                    None => {
                        let gap = centers
                            .iter()
                            .filter(|&&o| o != c)
                            .map(|o| (o - c).abs())
                            .fold(f64::INFINITY, f64::min);
                        if gap.is_finite() { gap / spread } else { c.abs().max(1.0) / spread }
                    }
                };
                let shoulder = r.antecedent.shoulder.unwrap_or(match () {
                    _ if !self.shoulders || lowest == highest => Shoulder::None,
                    _ if c == lowest => Shoulder::Left,
                    _ if c == highest => Shoulder::Right,
                    _ => Shoulder::None,
                });
                let cc = r.consequent.center;
                Ok(FuzzyRule {
                    antecedent: GaussianMf::with_shoulder(c, sigma, shoulder)?,
                    consequent: GaussianMf::with_shoulder(
                        cc,
                        r.consequent.sigma.unwrap_or(self.consequent_width * cc),
                        r.consequent.shoulder.unwrap_or_default(),
                    )?,
                })
            })
            .collect::<Result<Vec<_>, FuzzyError>>()?;
        RuleBase::new(rules, (self.output_universe[0], self.output_universe[1]), self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense-grid centroid computed directly from the rule definitions.
    fn brute_force_cog(rb: &RuleBase, x: f64, n: usize) -> f64 {
        let (lo, hi) = rb.universe();
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..n {
            let y = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let mu = rb
                .rules()
                .iter()
                .map(|r| r.consequent.degree(y).min(r.antecedent.degree(x)))
                .fold(0.0, f64::max);
            num += y * mu;
            den += mu;
        }
        num / den
    }

    #[test]
    fn gaussian_shape() {
        let mf = GaussianMf::new(2.0, 0.5).unwrap();
        assert_eq!(membership(&mf, 2.0).unwrap(), 1.0);
        assert!((membership(&mf, 2.5).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((membership(&mf, 2.5).unwrap() - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn zero_width_is_invalid() {
        assert_eq!(GaussianMf::new(1.0, 0.0), Err(FuzzyError::InvalidMf(0.0)));
        let bad = GaussianMf { center: 1.0, sigma: 0.0, shoulder: Shoulder::None };
        assert_eq!(membership(&bad, 1.0), Err(FuzzyError::InvalidMf(0.0)));
    }

    #[test]
    fn shoulders_saturate() {
        let left = GaussianMf::with_shoulder(1.0, 0.1, Shoulder::Left).unwrap();
        assert_eq!(left.degree(-5.0), 1.0);
        assert!(left.degree(1.3) < 0.02);
        let right = GaussianMf::with_shoulder(1.0, 0.1, Shoulder::Right).unwrap();
        assert_eq!(right.degree(50.0), 1.0);
    }

    #[test]
    fn cog_of_symmetric_shapes() {
        let n = 2001;
        let ys: Vec<f64> = (0..n).map(|k| k as f64 * 0.01).collect();
        let g = |c: f64, y: f64| (-(y - c) * (y - c) / (2.0 * 0.5 * 0.5)).exp();
        let clipped: Vec<f64> = ys.iter().map(|&y| g(10.0, y).min(0.3)).collect();
        assert!((cog_defuzz(&ys, &clipped).unwrap() - 10.0).abs() < 1e-9);
        let pair: Vec<f64> = ys.iter().map(|&y| g(4.0, y).max(g(14.0, y))).collect();
        assert!((cog_defuzz(&ys, &pair).unwrap() - 9.0).abs() < 1e-9);
        let zeros = vec![0.0; n];
        assert!(matches!(cog_defuzz(&ys, &zeros), Err(FuzzyError::DegenerateAggregate { .. })));
    }

    #[test]
    fn default_bases_encode_the_rule_tables() {
        let (t, r) = default_rulebases();
        assert_eq!(t.rules().len(), 4);
        assert_eq!(r.rules().len(), 4);
        let ant = |rb: &RuleBase| rb.rules().iter().map(|r| r.antecedent.center).collect::<Vec<_>>();
        let con = |rb: &RuleBase| rb.rules().iter().map(|r| r.consequent.center).collect::<Vec<_>>();
        assert_eq!(ant(&t), [5.0, 2.0, 1.0, 0.5]);
        assert_eq!(con(&t), [100.0, 50.0, 20.0, 10.0]);
        assert_eq!(ant(&r), [3.0, 2.0, 1.0, 0.5]);
        assert_eq!(con(&r), [1.0, 0.5, 0.2, 0.1]);
        assert!(t.rules().iter().chain(r.rules()).all(|r| r.consequent.center > 0.0));
        assert_eq!(t.universe(), (0.0, 120.0));
        assert_eq!(r.universe(), (0.0, 1.2));
        assert_eq!(t.grid(), 1001);
    }

    #[test]
    fn antecedent_centers_reproduce_consequents() {
        let (t, r) = default_rulebases();
        for rb in [&t, &r] {
            for rule in rb.rules() {
                let g = rb.infer(rule.antecedent.center).unwrap();
                let c = rule.consequent.center;
                assert!((g - c).abs() / c < 0.05, "x={} gave {g}, want {c}", rule.antecedent.center);
            }
        }
        assert!((t.infer(5.0).unwrap() - 100.0).abs() < 5.0);
        assert!((r.infer(0.5).unwrap() - 0.1).abs() < 0.005);
    }

    #[test]
    fn between_centers_matches_dense_oracle() {
        let t = RuleBase::translational();
        let g = t.infer(1.5).unwrap();
        assert!(g > 20.0 && g < 50.0, "{g}");
        let oracle = brute_force_cog(&t, 1.5, 100_000);
        assert!((g - oracle).abs() / oracle < 0.01, "{g} vs {oracle}");
    }

    #[test]
    fn monotone_over_the_rule_range() {
        let (t, r) = default_rulebases();
        for (rb, hi) in [(&t, 8.0), (&r, 6.0)] {
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=((hi / 0.01) as usize) {
                let g = rb.infer(k as f64 * 0.01).unwrap();
                assert!(g >= prev, "decrease at x={}", k as f64 * 0.01);
                prev = g;
            }
        }
    }

    #[test]
    fn grid_refinement_is_converged() {
        let (t, r) = default_rulebases();
        for rb in [t, r] {
            let fine = rb.with_grid(2001).unwrap();
            for k in 0..=600 {
                let x = k as f64 * 0.01;
                let (a, b) = (rb.infer(x).unwrap(), fine.infer(x).unwrap());
                assert!((a - b).abs() / b < 0.005);
            }
        }
    }

    #[test]
    fn degenerate_aggregate_falls_back_to_nearest_rule() {
        let rules = vec![
            FuzzyRule {
                antecedent: GaussianMf::new(0.0, 0.01).unwrap(),
                consequent: GaussianMf::new(1.0, 0.1).unwrap(),
            },
            FuzzyRule {
                antecedent: GaussianMf::new(10.0, 0.01).unwrap(),
                consequent: GaussianMf::new(2.0, 0.1).unwrap(),
            },
        ];
        let rb = RuleBase::new(rules, (0.0, 3.0), 301).unwrap();
        assert_eq!(rb.infer(6.0), Err(FuzzyError::DegenerateAggregate { fallback: Some(2.0) }));
        assert_eq!(rb.rate(3.0), 1.0);
        assert!(rb.rate(6.0) > 0.0);
    }

    #[test]
    fn rejects_bad_rule_bases() {
        let mf = GaussianMf::new(1.0, 0.1).unwrap();
        let rule = FuzzyRule { antecedent: mf, consequent: mf };
        assert!(RuleBase::new(vec![], (0.0, 2.0), 1001).is_err());
        assert!(RuleBase::new(vec![rule], (0.0, 2.0), 50).is_err());
        assert!(RuleBase::new(vec![rule], (2.0, 3.0), 1001).is_err());
        let negative = FuzzyRule { antecedent: mf, consequent: GaussianMf::new(-1.0, 0.1).unwrap() };
        assert!(RuleBase::new(vec![negative], (-2.0, 3.0), 1001).is_err());
    }

    #[test]
    fn explicit_widths_in_json_override_defaults() {
        let text = r#"{
            "rules": [
                {"antecedent": {"center": 1.0, "sigma": 0.3}, "consequent": {"center": 5.0, "sigma": 0.2}},
                {"antecedent": {"center": 2.0}, "consequent": {"center": 8.0}}
            ],
            "output_universe": [0.0, 10.0],
            "grid": 501,
            "shoulders": false
        }"#;
        let rb = RuleBase::from_json(text).unwrap();
        assert_eq!(rb.rules()[0].antecedent.sigma, 0.3);
        assert_eq!(rb.rules()[0].consequent.sigma, 0.2);
        assert_eq!(rb.rules()[1].antecedent.shoulder, Shoulder::None);
        assert!((rb.rules()[1].consequent.sigma - 0.8).abs() < 1e-15);
        assert_eq!(rb.grid(), 501);
    }

    proptest! {
        #[test]
        fn output_is_positive_and_bounded(x in 0.0..20.0f64) {
            let (t, r) = default_rulebases();
            for rb in [&t, &r] {
                let g = rb.rate(x);
                let (lo, hi) = rb.universe();
                let step = (hi - lo) / (rb.grid() - 1) as f64;
                let cmin = rb.rules().iter().map(|r| r.consequent.center).fold(f64::INFINITY, f64::min);
                let cmax = rb.rules().iter().map(|r| r.consequent.center).fold(0.0, f64::max);
                prop_assert!(g > 0.0);
                prop_assert!(g >= cmin - step && g <= cmax + step);
            }
        }

        #[test]
        fn rule_order_does_not_matter(x in 0.0..8.0f64, seed in 0usize..24) {
            let t = RuleBase::translational();
            let mut rules = t.rules().to_vec();
            // walk a few permutations of four rules
            rules.rotate_left(seed % 4);
            rules.swap(seed % 3, 3);
            let shuffled = RuleBase::new(rules, t.universe(), t.grid()).unwrap();
            let (a, b) = (t.infer(x).unwrap(), shuffled.infer(x).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.abs());
        }
    }
}
