//! Regions whose error term decays arbitrarily slowly.
//!
//! Given a decay profile `φ`, the envelope `Env(φ)` is a convex,
//! non-increasing function with `Env(0) = 1` that dominates a multiple of
//! `√φ`. Its unit differences `a_i = Env(i−1) − Env(i)` are the block lengths
//! of a zigzag prism, and the mass of the blocks shorter than `1/L` controls
//! how slowly the error term of that prism can decay.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::SymbolFunction;
use crate::reduction::{reduced_trace, ReducedTrace, ReductionOptions, SpectrumConfig};
use crate::regions::{Region3D, Sampler, ZigzagPrism};

pub const DEFAULT_TRUNCATION: usize = 10_000;
pub const DEFAULT_ENVELOPE_GRID: usize = 2000;
pub const DEFAULT_EPS0_CONSTANT: f64 = 1.0;
/// Tolerance of the convexity and monotonicity re-validation.
pub const SHAPE_TOL: f64 = 1e-12;

/// Decay profiles understood by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayProfile {
    /// `φ ≡ 0`.
    Zero,
    /// `1/ln(2+L)`.
    InverseLog,
    /// `(1+L)^{−p}`.
    Power { p: f64 },
}

impl DecayProfile {
    pub fn eval(&self, l: f64) -> f64 {
        match *self {
            DecayProfile::Zero => 0.0,
            DecayProfile::InverseLog => 1.0 / (2.0 + l).ln(),
            DecayProfile::Power { p } => (1.0 + l).powf(-p),
        }
    }
}

fn reference_term(t: f64) -> f64 {
    1.0 / (2.0 + t).ln().sqrt()
}

/// `Env(t) = N (h(t/2) + 1/√ln(2+t))` with `h` the lower convex hull of
/// `√f̂`, where `f̂(s) = sup_{t ≥ s} φ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFunction {
    /// Vertices of the hull `h`, sorted by abscissa.
    hull: Vec<(f64, f64)>,
    pub normalization: f64,
    pub t_max: f64,
    /// `min Env/√φ` over the sampling grid where `φ > 0`.
    pub sqrt_ratio_min: Option<f64>,
}

impl EnvelopeFunction {
    fn hull_at(&self, s: f64) -> f64 {
        let k = self.hull.partition_point(|&(t, _)| t <= s);
        if k == 0 {
            return self.hull[0].1;
        }
        if k == self.hull.len() {
            return self.hull[k - 1].1;
        }
        let (t0, v0) = self.hull[k - 1];
        let (t1, v1) = self.hull[k];
        v0 + (v1 - v0) * (s - t0) / (t1 - t0)
    }

    /// Value at `t ≥ 0`; beyond `2 T_max` the hull part is held constant.
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        self.normalization * (self.hull_at(0.5 * t) + reference_term(t))
    }

    /// `Env(t) ≥ C/√ln(2+t)` holds with this `C`.
    pub fn lower_bound_constant(&self) -> f64 {
        self.normalization
    }

    pub fn hull_vertices(&self) -> &[(f64, f64)] {
        &self.hull
    }

    /// `(t, Env(t))` on `n` log-spaced points of `[0, T_max]`.
    pub fn breakpoints(&self, n: usize) -> Vec<(f64, f64)> {
        log_grid(self.t_max, n).into_iter().map(|t| (t, self.eval(t))).collect()
    }

    /// Checks convexity and monotonicity on `n` log-spaced points.
    pub fn validate_shape(&self, n: usize) -> Result<()> {
        let pts = self.breakpoints(n);
        let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        if let Some(s) = slopes.iter().find(|&&s| s > SHAPE_TOL) {
            return Err(Error::validation(format!("envelope increases somewhere (slope {s:e})")));
        }
        for w in slopes.windows(2) {
            if w[1] < w[0] - SHAPE_TOL * (1.0 + w[0].abs()) {
                return Err(Error::validation(format!("envelope is not convex (slopes {:e}, {:e})", w[0], w[1])));
            }
        }
        Ok(())
    }
}

/// `n` points from 0 to `t_max`, uniform in `ln(1+t)`.
fn log_grid(t_max: f64, n: usize) -> Vec<f64> {
    let top = t_max.ln_1p();
    let mut g: Vec<f64> = (0..n).map(|k| (top * k as f64 / (n - 1) as f64).exp_m1()).collect();
    g[n - 1] = t_max;
    g
}

/// Lower convex hull of points sorted by abscissa (monotone chain).
fn lower_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let turn = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if turn <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

pub fn build_envelope<F: Fn(f64) -> f64>(phi: F, t_max: f64, grid_n: usize) -> Result<EnvelopeFunction> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::domain(format!("T_max must be > 0, got {t_max}")));
    }
    if grid_n < 3 {
        return Err(Error::domain(format!("envelope grid needs >= 3 points, got {grid_n}")));
    }
    let grid = log_grid(t_max, grid_n);
    let values: Vec<f64> = grid.iter().map(|&t| phi(t)).collect();
    if let Some((t, v)) = grid.iter().zip(&values).find(|(_, v)| !v.is_finite() || **v < 0.0) {
        return Err(Error::validation(format!("phi must be finite and >= 0, got phi({t}) = {v}")));
    }
    let mut sup = values.clone();
    for k in (0..grid_n - 1).rev() {
        sup[k] = sup[k].max(sup[k + 1]);
    }
    let tail_start = grid.partition_point(|&t| t < 0.1 * t_max);
    if sup[0] > 0.0 && sup[tail_start] > 0.9 * sup[0] {
        return Err(Error::validation(format!(
            "phi does not decay over [0, {t_max}]: sup over the last decade is {} vs {} overall",
            sup[tail_start], sup[0]
        )));
    }
    let points: Vec<(f64, f64)> = grid.iter().zip(&sup).map(|(&t, &s)| (t, s.sqrt())).collect();
    let hull = lower_hull(&points);
    let normalization = 1.0 / (hull[0].1 + reference_term(0.0));
    let mut env = EnvelopeFunction { hull, normalization, t_max, sqrt_ratio_min: None };
    env.sqrt_ratio_min = grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > 0.0)
        .map(|(&t, &v)| env.eval(t) / v.sqrt())
        .reduce(f64::min);
    env.validate_shape(4 * grid_n)?;
    Ok(env)
}

/// Truncated summable sequence with the remaining mass in `tail_sum`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySequence {
    pub a: Vec<f64>,
    pub tail_sum: f64,
}

impl DecaySequence {
    pub fn new(a: Vec<f64>, tail_sum: f64) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::validation("sequence is empty"));
        }
        if a.iter().any(|x| !(*x >= 0.0)) || !(tail_sum >= 0.0) {
            return Err(Error::validation("sequence terms must be >= 0"));
        }
        let total = a.iter().sum::<f64>() + tail_sum;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation(format!("sequence mass must be 1, got {total}")));
        }
        Ok(Self { a, tail_sum })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Zigzag block lengths: the terms followed by one closing block.
    pub fn blocks(&self) -> Vec<f64> {
        let mut b = self.a.clone();
        if self.tail_sum > 0.0 {
            b.push(self.tail_sum);
        }
        b
    }
}

/// `a_i = Env(i−1) − Env(i)` for `i = 1..N`, tail `Env(N)`.
pub fn sequence_from_envelope(env: &EnvelopeFunction, n: usize) -> Result<DecaySequence> {
    if n < 2 {
        return Err(Error::domain(format!("truncation N must be >= 2, got {n}")));
    }
    if n as f64 > env.t_max {
        return Err(Error::domain(format!("truncation N = {n} exceeds the envelope window {}", env.t_max)));
    }
    let values: Vec<f64> = (0..=n).map(|i| env.eval(i as f64)).collect();
    let a: Vec<f64> = values.windows(2).map(|w| (w[0] - w[1]).max(0.0)).collect();
    // telescoping: keep the mass exact by taking the tail as the remainder
    let tail_sum = (1.0 - a.iter().sum::<f64>()).max(0.0);
    DecaySequence::new(a, tail_sum)
}

pub fn zigzag_prism(seq: &DecaySequence) -> Result<ZigzagPrism> {
    ZigzagPrism::from_blocks(seq.blocks())
}

pub fn zigzag_g0(seq: &DecaySequence, t: f64) -> Result<f64> {
    zigzag_prism(seq)?.g0(t)
}

pub fn build_zigzag_region(seq: &DecaySequence) -> Result<Region3D> {
    Ok(Region3D::Zigzag(zigzag_prism(seq)?))
}

/// `Σ_{a_i < 1/L} a_i − C/ln L`, with the tail counted once `a_N < 1/L`.
pub fn epsilon0(l: f64, seq: &DecaySequence, c: f64) -> Result<f64> {
    if !(l >= 2.0) {
        return Err(Error::domain(format!("epsilon0 needs L >= 2, got {l}")));
    }
    let cut = 1.0 / l;
    let mut s: f64 = seq.a.iter().filter(|&&x| x < cut).sum();
    if *seq.a.last().expect("nonempty") < cut {
        s += seq.tail_sum;
    }
    Ok(s - c / l.ln())
}

/// Smallest sampled `L` from which `ε₀ > φ` holds at every later sample.
/// `rows` are `(L, ε₀, φ)` sorted by `L`.
pub fn exceedance_threshold(rows: &[(f64, f64, f64)]) -> Option<f64> {
    let mut threshold = None;
    for &(l, e, p) in rows.iter().rev() {
        if e > p {
            threshold = Some(l);
        } else {
            break;
        }
    }
    threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermMeasurement {
    pub l: f64,
    pub epsilon: f64,
    pub std_error: f64,
    /// Measured `tr(D − D²)`.
    pub trace: f64,
    /// `νB ∫|n·e₃| L² ln L / (4π³)`.
    pub leading: f64,
    pub reduced: ReducedTrace,
}

/// `ε = [νB P L² ln L/(4π³) − tr(D − D²)]/(L² ln L)` for any region, with
/// `P` its perpendicular area integral.
pub fn error_term(
    region: &Region3D,
    cfg: &SpectrumConfig,
    l: f64,
    sampler: &Sampler,
    options: &ReductionOptions,
) -> Result<ErrorTermMeasurement> {
    if !(l > 1.0) {
        return Err(Error::domain(format!("error term needs L > 1, got {l}")));
    }
    let f = SymbolFunction::linear_minus_square();
    let reduced = reduced_trace(region, cfg, &f, l, sampler, options)?;
    let norm = l * l * l.ln();
    let leading = cfg.nu as f64 * cfg.b * region.perpendicular_area_integral() * norm / (4.0 * PI.powi(3));
    Ok(ErrorTermMeasurement {
        l,
        epsilon: (leading - reduced.value) / norm,
        std_error: reduced.std_error / norm,
        trace: reduced.value,
        leading,
        reduced,
    })
}

/// The error term of the zigzag prism built from `seq`.
pub fn measure_error_term(
    seq: &DecaySequence,
    cfg: &SpectrumConfig,
    l: f64,
    sampler: &Sampler,
    options: &ReductionOptions,
) -> Result<ErrorTermMeasurement> {
    error_term(&build_zigzag_region(seq)?, cfg, l, sampler, options)
}

/// CSV with columns `i,a,cumulative`; the tail is written as index `tail`.
pub fn write_sequence_csv<W: Write>(mut out: W, seq: &DecaySequence) -> std::io::Result<()> {
    writeln!(out, "i,a,cumulative")?;
    let mut cum = 0.0;
    for (i, a) in seq.a.iter().enumerate() {
        cum += a;
        writeln!(out, "{},{:e},{:e}", i + 1, a, cum)?;
    }
    writeln!(out, "tail,{:e},{:e}", seq.tail_sum, cum + seq.tail_sum)
}

/// CSV with columns `t,env`.
pub fn write_envelope_csv<W: Write>(mut out: W, env: &EnvelopeFunction, n: usize) -> std::io::Result<()> {
    writeln!(out, "t,env")?;
    for (t, v) in env.breakpoints(n) {
        writeln!(out, "{t:e},{v:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::landau_levels;

    fn inverse_log() -> EnvelopeFunction {
        build_envelope(|l| DecayProfile::InverseLog.eval(l), 1e5, DEFAULT_ENVELOPE_GRID).unwrap()
    }

    #[test]
    fn zero_profile_is_reference_branch() {
        let env = build_envelope(|_| 0.0, 1e4, 500).unwrap();
        assert_eq!(env.eval(0.0), 1.0);
        for t in [1.0, 10.0, 1e3] {
            let expected = reference_term(t) / reference_term(0.0);
            assert!((env.eval(t) - expected).abs() < 1e-15);
        }
        assert_eq!(env.sqrt_ratio_min, None);
    }

    #[test]
    fn envelopes_are_normalized_convex_and_decreasing() {
        let profiles: Vec<Box<dyn Fn(f64) -> f64>> = vec![
            Box::new(|l| DecayProfile::InverseLog.eval(l)),
            Box::new(|l| DecayProfile::Power { p: 0.5 }.eval(l)),
            Box::new(|l: f64| (1.0 + (3.0 * l).sin()) / (1.0 + l)),
            Box::new(|l: f64| if l < 5.0 { 4.0 } else { 0.0 }),
        ];
        for phi in &profiles {
            let env = build_envelope(phi, 1e4, 800).unwrap();
            assert!((env.eval(0.0) - 1.0).abs() < 1e-15);
            env.validate_shape(10_000).unwrap();
            for t in [0.0, 1.0, 100.0, 1e4] {
                assert!(env.eval(t) >= env.lower_bound_constant() * reference_term(t) - 1e-15);
            }
        }
    }

    #[test]
    fn envelope_dominates_root_of_profile() {
        let env = inverse_log();
        let c = env.sqrt_ratio_min.unwrap();
        assert!(c > 0.0);
        for t in [0.0, 3.0, 77.0, 5e3, 1e5] {
            assert!(env.eval(t) >= c * DecayProfile::InverseLog.eval(t).sqrt() * (1.0 - 1e-12));
        }
    }

    #[test]
    fn non_decaying_profile_is_rejected() {
        assert!(matches!(build_envelope(|_| 1.0, 1e4, 200), Err(Error::Validation(_))));
        assert!(build_envelope(|_| f64::NAN, 1e4, 200).is_err());
    }

    #[test]
    fn envelope_ordering_for_scaled_profiles() {
        let big = inverse_log();
        let small = build_envelope(|l| 0.25 * DecayProfile::InverseLog.eval(l), 1e5, DEFAULT_ENVELOPE_GRID).unwrap();
        for (t, v) in small.breakpoints(500) {
            assert!(big.eval(t) >= v - 1e-15, "t = {t}");
        }
    }

    #[test]
    fn profile_is_negligible_against_envelope() {
        for p in [0.5, 1.0] {
            let phi = DecayProfile::Power { p };
            let env = build_envelope(|l| phi.eval(l), 1e5, DEFAULT_ENVELOPE_GRID).unwrap();
            let ratio = |t: f64| phi.eval(t) / env.eval(t);
            assert!(ratio(1e5) * 2.0 <= ratio(1e3));
        }
    }

    #[test]
    fn sequence_invariants() {
        let env = inverse_log();
        let seq = sequence_from_envelope(&env, DEFAULT_TRUNCATION).unwrap();
        let total: f64 = seq.a.iter().sum::<f64>() + seq.tail_sum;
        assert!((total - 1.0).abs() < 1e-14);
        assert!((seq.tail_sum - env.eval(DEFAULT_TRUNCATION as f64)).abs() < 1e-13);
        for (i, w) in seq.a.windows(2).enumerate() {
            assert!(w[1] <= w[0] + 1e-15, "i = {i}");
        }
        for (i, a) in seq.a.iter().enumerate() {
            assert!(*a <= 1.0 / (i + 1) as f64);
        }
        for l in [1usize, 10, 100, 5000] {
            let rest: f64 = seq.a[l..].iter().sum::<f64>() + seq.tail_sum;
            assert!((rest - env.eval(l as f64)).abs() < 1e-13);
        }
        assert!(sequence_from_envelope(&env, 1).is_err());
        assert!(sequence_from_envelope(&env, 200_000).is_err());
    }

    #[test]
    fn g0_examples() {
        let seq = sequence_from_envelope(&inverse_log(), 64).unwrap();
        let a1 = seq.a[0];
        assert_eq!(zigzag_g0(&seq, -1.0).unwrap(), 0.0);
        assert_eq!(zigzag_g0(&seq, 0.0).unwrap(), 1.0);
        assert_eq!(zigzag_g0(&seq, 2.0).unwrap(), 0.0);
        assert!((zigzag_g0(&seq, a1 / 2.0).unwrap() - (1.0 + a1 / 2.0)).abs() < 1e-15);
        assert!((zigzag_g0(&seq, a1).unwrap() - 1.0).abs() < 1e-15);
        assert!(zigzag_g0(&seq, 2.1).is_err());
    }

    #[test]
    fn g0_is_one_lipschitz() {
        use rand::{Rng, SeedableRng};
        let seq = sequence_from_envelope(&inverse_log(), 1000).unwrap();
        let z = zigzag_prism(&seq).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let s = -1.0 + 3.0 * rng.random::<f64>();
            let t = (s + 0.1 * (rng.random::<f64>() - 0.5)).clamp(-1.0, 2.0);
            assert!((z.g0(s).unwrap() - z.g0(t).unwrap()).abs() <= (s - t).abs() * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn zigzag_region_sections() {
        let seq = sequence_from_envelope(&inverse_log(), 64).unwrap();
        let region = build_zigzag_region(&seq).unwrap();
        assert_eq!(region.perpendicular_area_integral(), 6.0);
        let cs = region.cross_section([0.5, 0.0]).unwrap();
        assert_eq!(cs.intervals.intervals(), &[(-1.0, 2.0)]);
        let a1 = seq.a[0];
        let cs = region.cross_section([0.5, 1.0 + a1 / 4.0]).unwrap();
        let expected: Vec<f64> = seq.blocks().into_iter().filter(|&b| b > a1 / 2.0).map(|b| b - a1 / 2.0).collect();
        let got = cs.intervals.lengths();
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn epsilon0_empty_sum() {
        let seq = DecaySequence::new(vec![0.5, 0.5], 0.0).unwrap();
        let l = 2.001;
        assert_eq!(epsilon0(l, &seq, 1.0).unwrap(), -1.0 / l.ln());
        assert_eq!(epsilon0(1e6, &seq, 1.0).unwrap(), -1.0 / 1e6f64.ln());
        // every term qualifies at L = 2
        let small = DecaySequence::new(vec![0.4, 0.3, 0.2, 0.1], 0.0).unwrap();
        assert!((epsilon0(2.0, &small, 1.0).unwrap() - (1.0 - 1.0 / 2f64.ln())).abs() < 1e-15);
        assert!(epsilon0(1.5, &seq, 1.0).is_err());
    }

    #[test]
    fn epsilon0_qualifying_mass_shrinks_with_l() {
        // the set {a_i < 1/L} loses terms as L grows
        let seq = sequence_from_envelope(&inverse_log(), DEFAULT_TRUNCATION).unwrap();
        let mass = |l: f64| epsilon0(l, &seq, 0.0).unwrap();
        let mut last = f64::INFINITY;
        for l in [2.0, 10.0, 100.0, 1e3, 1e4, 1e5] {
            assert!(mass(l) <= last);
            last = mass(l);
        }
        assert!((mass(2.0) - 1.0).abs() < 1e-14);
        assert!((mass(1.0 / seq.a[1]) - (1.0 - seq.a[0] - seq.a[1])).abs() < 1e-14);
    }

    #[test]
    fn exceedance_threshold_picks_final_run() {
        let rows = [(2.0, 0.5, 0.1), (5.0, 0.0, 0.1), (10.0, 0.3, 0.2), (20.0, 0.3, 0.1)];
        assert_eq!(exceedance_threshold(&rows), Some(10.0));
        assert_eq!(exceedance_threshold(&[(2.0, 0.0, 1.0)]), None);
    }

    #[test]
    fn error_term_of_cube_is_bounded() {
        let cfg = landau_levels(1.0, 3.0).unwrap();
        let m = error_term(&Region3D::unit_cube(), &cfg, 50.0, &Sampler::Grid { n: 3 }, &ReductionOptions::default())
            .unwrap();
        // O(L²) remainder: |ε| ln L stays of order one
        assert!((m.epsilon * 50f64.ln()).abs() < 1.0, "{}", m.epsilon);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn csv_dumps() {
        let env = build_envelope(|l| DecayProfile::InverseLog.eval(l), 100.0, 50).unwrap();
        let seq = sequence_from_envelope(&env, 10).unwrap();
        let mut out = Vec::new();
        write_sequence_csv(&mut out, &seq).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.lines().last().unwrap().starts_with("tail,"));
        let mut out = Vec::new();
        write_envelope_csv(&mut out, &env, 20).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 21);
    }
}
