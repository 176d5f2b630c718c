//! Convergence experiments around the critical contrast-scaling exponent.
//!
//! The central experiment compares boundary-value distances along two period
//! sequences chosen so that the target endpoint alternates between the matrix
//! phase (eps = 1/(2k)) and the inclusion interior (eps = 1/(2k+1)). Below
//! the critical exponent the two sequences converge to the same effective
//! value; at the critical exponent they stay separated by a fixed penalty;
//! above it the odd sequence diverges.

use crate::coefficient::{check_admissible, MetricParams, PExponent};
use crate::curves::snap_to_matrix;
use crate::error::{Error, Result};
use crate::geometry::{contains, periodic_contains, InclusionShape, Point2};
use crate::grid_solver::{distance_folded, SolverSettings};
use crate::homogenization::estimate_psi;
use crate::opacity::estimate_lambda;
use crate::tolerances::{EXCESS_RATIO_WINDOW, TOL_GAP_FLOOR, TOL_GRID};
use rayon::prelude::*;

/// Default window list for the effective-norm reference value.
pub const DEFAULT_R_LIST: [f64; 4] = [4.0, 8.0, 16.0, 32.0];

/// Number of boundary samples for the opacity threshold in sweeps.
const LAMBDA_SAMPLES: usize = 256;

/// Configuration of a critical-exponent sweep.
#[derive(Debug, Clone)]
pub struct CriticalRunConfig {
    pub shape: InclusionShape,
    pub beta: f64,
    pub p_list: Vec<PExponent>,
    /// Inclusive sequence index range.
    pub k_min: u32,
    pub k_max: u32,
    pub xi1: Point2,
    pub xi2: Point2,
    pub settings: SolverSettings,
    /// Window list for the effective-norm reference.
    pub r_list: Vec<f64>,
}

impl CriticalRunConfig {
    pub fn new(shape: InclusionShape, beta: f64) -> Self {
        CriticalRunConfig {
            shape,
            beta,
            p_list: vec![
                PExponent::Finite(0.5),
                PExponent::Finite(1.0),
                PExponent::Finite(2.0),
                PExponent::Infinite,
            ],
            k_min: 1,
            k_max: 12,
            xi1: Point2::new(0.0, 0.0),
            xi2: Point2::new(0.5, 0.5),
            settings: SolverSettings::default(),
            r_list: DEFAULT_R_LIST.to_vec(),
        }
    }

    /// The sweep requires the first endpoint in the matrix phase and the
    /// second inside the inclusion.
    pub fn validate(&self) -> Result<f64> {
        if self.k_min < 1 || self.k_max < self.k_min {
            return Err(Error::Config(format!(
                "empty sequence range {}..={}",
                self.k_min, self.k_max
            )));
        }
        if self.p_list.is_empty() {
            return Err(Error::Config("empty exponent list".into()));
        }
        if periodic_contains(&self.shape, self.xi1) {
            return Err(Error::Config(
                "first endpoint must lie in the matrix phase".into(),
            ));
        }
        if !contains(&self.shape, self.xi2) {
            return Err(Error::Config(
                "second endpoint must lie inside the inclusion".into(),
            ));
        }
        Ok(self.shape.inradius_at(self.xi2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn epsilon(self, k: u32) -> f64 {
        match self {
            Parity::Even => 1.0 / (2.0 * k as f64),
            Parity::Odd => 1.0 / (2.0 * k as f64 + 1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Outcome of one sweep row.
#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// The endpoint sits inside a hard obstacle or the phases separate the
    /// endpoints.
    Disconnected,
    /// The parameters fail the admissibility inequality at this period.
    Inadmissible,
    Failed(String),
}

/// One (p, parity, k) measurement.
#[derive(Debug, Clone)]
pub struct SequenceRecord {
    pub p: PExponent,
    pub parity: Parity,
    pub k: u32,
    pub epsilon: f64,
    pub distance: Option<f64>,
    pub status: RowStatus,
    pub runtime_ms: f64,
}

/// Per-exponent verdict of the sweep.
#[derive(Debug, Clone)]
pub enum CriticalVerdict {
    /// p < 1: the parities merge under the certified envelope.
    Converges {
        final_gap: f64,
        envelope: f64,
        monotone_after_k2: bool,
        pass: bool,
    },
    /// p = 1: a persistent gap of at least beta * rho * (1 - slack).
    CriticalGap {
        floor: f64,
        min_tail_gap: f64,
        even_matches_psi: bool,
        pass: bool,
    },
    /// p > 1 finite: the odd-sequence excess over the reference grows like
    /// eps^(1-p).
    Diverges {
        ratios: Vec<(u32, u32, f64)>,
        excess_grows: bool,
        pass: bool,
    },
    /// Infinite exponent: the odd sequence is infeasible outright.
    HardObstacle {
        odd_all_disconnected: bool,
        even_matches_psi: bool,
        pass: bool,
    },
}

impl CriticalVerdict {
    pub fn pass(&self) -> bool {
        match self {
            CriticalVerdict::Converges { pass, .. }
            | CriticalVerdict::CriticalGap { pass, .. }
            | CriticalVerdict::Diverges { pass, .. }
            | CriticalVerdict::HardObstacle { pass, .. } => *pass,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            CriticalVerdict::Converges {
                final_gap,
                envelope,
                monotone_after_k2,
                pass,
            } => format!(
                "converges: final gap {final_gap:.6} vs envelope {envelope:.6}, monotone {monotone_after_k2} -> {}",
                verdict_word(*pass)
            ),
            CriticalVerdict::CriticalGap {
                floor,
                min_tail_gap,
                even_matches_psi,
                pass,
            } => format!(
                "critical gap: tail gap {min_tail_gap:.6} vs floor {floor:.6}, even matches reference {even_matches_psi} -> {}",
                verdict_word(*pass)
            ),
            CriticalVerdict::Diverges {
                ratios,
                excess_grows,
                pass,
            } => format!(
                "diverges: excess ratios {:?}, growing {excess_grows} -> {}",
                ratios
                    .iter()
                    .map(|(a, b, r)| format!("{a}->{b}: {r:.3}"))
                    .collect::<Vec<_>>(),
                verdict_word(*pass)
            ),
            CriticalVerdict::HardObstacle {
                odd_all_disconnected,
                even_matches_psi,
                pass,
            } => format!(
                "hard obstacle: odd sequence disconnected {odd_all_disconnected}, even matches reference {even_matches_psi} -> {}",
                verdict_word(*pass)
            ),
        }
    }
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

/// Full sweep output.
#[derive(Debug, Clone)]
pub struct CriticalReport {
    pub beta: f64,
    pub psi_ref: f64,
    pub lambda_hat: f64,
    pub rho: f64,
    pub rows: Vec<SequenceRecord>,
    pub verdicts: Vec<(PExponent, CriticalVerdict)>,
}

/// Certified even/odd gap envelope below the critical exponent: the snap
/// construction bounds the gap by 2 beta sqrt(2) eps^(1-p), plus the grid
/// tolerance on both solves.
pub fn gap_envelope(beta: f64, p: f64, eps: f64, psi_ref: f64) -> f64 {
    2.0 * beta * std::f64::consts::SQRT_2 * eps.powf(1.0 - p) + 2.0 * TOL_GRID * psi_ref
}

/// Runs the two-sequence sweep for every configured exponent.
pub fn run_critical(config: &CriticalRunConfig) -> Result<CriticalReport> {
    let rho = config.validate()?;
    let lambda_hat = estimate_lambda(&config.shape, LAMBDA_SAMPLES)?.lambda_hat;
    let offset = config.xi2 - config.xi1;
    let psi_ref = estimate_psi(
        &config.shape,
        config.beta,
        offset * (1.0 / offset.norm()),
        &config.r_list,
        &config.settings,
    )?
    .value
        * offset.norm();

    let mut jobs: Vec<(usize, Parity, u32)> = Vec::new();
    for (pi, _) in config.p_list.iter().enumerate() {
        for k in config.k_min..=config.k_max {
            jobs.push((pi, Parity::Even, k));
            jobs.push((pi, Parity::Odd, k));
        }
    }
    let mut rows: Vec<SequenceRecord> = jobs
        .par_iter()
        .map(|&(pi, parity, k)| {
            let p = config.p_list[pi];
            let epsilon = parity.epsilon(k);
            sweep_row(config, p, parity, k, epsilon, lambda_hat)
        })
        .collect();
    rows.sort_by(|a, b| {
        let pa = config
            .p_list
            .iter()
            .position(|p| *p == a.p)
            .unwrap_or(usize::MAX);
        let pb = config
            .p_list
            .iter()
            .position(|p| *p == b.p)
            .unwrap_or(usize::MAX);
        pa.cmp(&pb)
            .then_with(|| a.parity.label().cmp(b.parity.label()))
            .then_with(|| a.k.cmp(&b.k))
    });

    let verdicts = config
        .p_list
        .iter()
        .map(|&p| (p, judge(&rows, p, config, psi_ref, rho)))
        .collect();

    Ok(CriticalReport {
        beta: config.beta,
        psi_ref,
        lambda_hat,
        rho,
        rows,
        verdicts,
    })
}

fn sweep_row(
    config: &CriticalRunConfig,
    p: PExponent,
    parity: Parity,
    k: u32,
    epsilon: f64,
    lambda_hat: f64,
) -> SequenceRecord {
    let base = SequenceRecord {
        p,
        parity,
        k,
        epsilon,
        distance: None,
        status: RowStatus::Ok,
        runtime_ms: 0.0,
    };
    let params = match MetricParams::new(config.beta, p, epsilon) {
        Ok(p) => p,
        Err(e) => {
            return SequenceRecord {
                status: RowStatus::Failed(e.to_string()),
                ..base
            }
        }
    };
    if !check_admissible(&params, lambda_hat).is_admissible() {
        return SequenceRecord {
            status: RowStatus::Inadmissible,
            ..base
        };
    }
    match distance_folded(&config.shape, &params, config.xi1, config.xi2, &config.settings) {
        Ok(res) => SequenceRecord {
            distance: Some(res.value),
            runtime_ms: res.stats.runtime_ms,
            ..base
        },
        Err(Error::Disconnected) | Err(Error::EndpointInObstacle { .. }) => SequenceRecord {
            status: RowStatus::Disconnected,
            ..base
        },
        Err(e) => SequenceRecord {
            status: RowStatus::Failed(e.to_string()),
            ..base
        },
    }
}

fn row(
    rows: &[SequenceRecord],
    p: PExponent,
    parity: Parity,
    k: u32,
) -> Option<&SequenceRecord> {
    rows.iter()
        .find(|r| r.p == p && r.parity == parity && r.k == k)
}

fn judge(
    rows: &[SequenceRecord],
    p: PExponent,
    config: &CriticalRunConfig,
    psi_ref: f64,
    rho: f64,
) -> CriticalVerdict {
    let ks: Vec<u32> = (config.k_min..=config.k_max).collect();
    let gap_at = |k: u32| -> Option<f64> {
        let even = row(rows, p, Parity::Even, k)?.distance?;
        let odd = row(rows, p, Parity::Odd, k)?.distance?;
        Some((even - odd).abs())
    };
    let even_tail_matches = |tol: f64| -> bool {
        ks.iter()
            .rev()
            .find_map(|&k| row(rows, p, Parity::Even, k).and_then(|r| r.distance))
            .is_some_and(|d| (d - psi_ref).abs() <= tol * psi_ref)
    };

    match p {
        PExponent::Infinite => {
            let odd_all_disconnected = ks.iter().all(|&k| {
                row(rows, p, Parity::Odd, k)
                    .is_some_and(|r| r.status == RowStatus::Disconnected)
            });
            let even_matches_psi = even_tail_matches(TOL_GRID);
            let pass = odd_all_disconnected && even_matches_psi;
            CriticalVerdict::HardObstacle {
                odd_all_disconnected,
                even_matches_psi,
                pass,
            }
        }
        PExponent::Finite(pv) if pv < 1.0 => {
            let gaps: Vec<(u32, f64)> = ks
                .iter()
                .filter_map(|&k| gap_at(k).map(|g| (k, g)))
                .collect();
            let (final_k, final_gap) = gaps.last().copied().unwrap_or((0, f64::NAN));
            let envelope = gap_envelope(
                config.beta,
                pv,
                Parity::Odd.epsilon(final_k.max(1)),
                psi_ref,
            );
            let monotone_after_k2 = gaps
                .windows(2)
                .filter(|w| w[0].0 >= 2)
                .all(|w| w[1].1 <= w[0].1);
            let pass = final_gap.is_finite() && final_gap <= envelope && monotone_after_k2;
            CriticalVerdict::Converges {
                final_gap,
                envelope,
                monotone_after_k2,
                pass,
            }
        }
        PExponent::Finite(pv) if pv > 1.0 => {
            let excess_at = |k: u32| -> Option<f64> {
                let odd = row(rows, p, Parity::Odd, k)?.distance?;
                Some(odd - psi_ref)
            };
            let excesses: Vec<(u32, f64)> = ks
                .iter()
                .filter_map(|&k| excess_at(k).map(|e| (k, e)))
                .collect();
            let excess_grows = excesses.windows(2).all(|w| w[1].1 >= w[0].1);
            let mut ratios = Vec::new();
            for &(k, ex) in &excesses {
                if let Some(&(_, ex2)) = excesses.iter().find(|(k2, _)| *k2 == 2 * k) {
                    if ex > 0.0 {
                        ratios.push((k, 2 * k, ex2 / ex));
                    }
                }
            }
            let (lo, hi) = EXCESS_RATIO_WINDOW;
            let pass = excess_grows
                && !ratios.is_empty()
                && ratios.iter().all(|(_, _, r)| *r >= lo && *r <= hi);
            CriticalVerdict::Diverges {
                ratios,
                excess_grows,
                pass,
            }
        }
        PExponent::Finite(_) => {
            let floor = config.beta * rho * (1.0 - TOL_GAP_FLOOR);
            let with_gaps: Vec<(u32, f64)> = ks
                .iter()
                .filter_map(|&k| {
                    let even = row(rows, p, Parity::Even, k)?.distance?;
                    let odd = row(rows, p, Parity::Odd, k)?.distance?;
                    Some((k, odd - even))
                })
                .collect();
            let tail = with_gaps.iter().rev().take(3).collect::<Vec<_>>();
            let min_tail_gap = tail
                .iter()
                .map(|(_, g)| *g)
                .fold(f64::INFINITY, f64::min);
            let even_matches_psi = even_tail_matches(TOL_GRID);
            let pass = tail.len() == 3 && min_tail_gap >= floor && even_matches_psi;
            CriticalVerdict::CriticalGap {
                floor,
                min_tail_gap,
                even_matches_psi,
                pass,
            }
        }
    }
}

/// One sample of the convergence-rate fit.
#[derive(Debug, Clone)]
pub struct RateSample {
    pub epsilon: f64,
    pub distance: Option<f64>,
    pub gap: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub within_envelope: bool,
    pub admissible: bool,
}

/// Convergence-rate report for a fixed exponent below 1.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub psi_ref: f64,
    pub exponent: f64,
    pub envelope_exponent: f64,
    pub c1: f64,
    pub c2: f64,
    pub samples: Vec<RateSample>,
}

/// Fits the empirical convergence rate |d - psi_ref| ~ eps^q and checks the
/// certified envelope on every admissible sample.
#[allow(clippy::too_many_arguments)]
pub fn run_rate(
    shape: &InclusionShape,
    beta: f64,
    p: f64,
    xi1: Point2,
    xi2: Point2,
    eps_list: &[f64],
    r_list: &[f64],
    settings: &SolverSettings,
) -> Result<RateReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParams(format!(
            "rate fit needs an exponent in (0, 1), got {p}"
        )));
    }
    if xi1 == xi2 {
        return Err(Error::Degenerate(
            "degenerate endpoints: rate undefined for coincident points".into(),
        ));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("eps_list must be decreasing".into()));
    }
    let lambda_hat = estimate_lambda(shape, LAMBDA_SAMPLES)?.lambda_hat;
    let offset = xi2 - xi1;
    let sep = offset.norm();
    let psi_ref =
        estimate_psi(shape, beta, offset * (1.0 / sep), r_list, settings)?.value * sep;
    let c1 = 2.0 * beta * std::f64::consts::SQRT_2;
    let c2 = 4.0 * beta * std::f64::consts::SQRT_2;

    let samples: Vec<RateSample> = eps_list
        .par_iter()
        .map(|&eps| -> Result<RateSample> {
            let params = MetricParams::new(beta, PExponent::Finite(p), eps)?;
            let lower = sep - c1 * eps;
            let upper = beta * sep + c2 * eps.powf(1.0 - p);
            if !check_admissible(&params, lambda_hat).is_admissible() {
                return Ok(RateSample {
                    epsilon: eps,
                    distance: None,
                    gap: None,
                    lower,
                    upper,
                    within_envelope: false,
                    admissible: false,
                });
            }
            let d = distance_folded(shape, &params, xi1, xi2, settings)?.value;
            let within = d * (1.0 + TOL_GRID) >= lower && d * (1.0 - TOL_GRID) <= upper;
            Ok(RateSample {
                epsilon: eps,
                distance: Some(d),
                gap: Some((d - psi_ref).abs()),
                lower,
                upper,
                within_envelope: within,
                admissible: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter_map(|s| s.gap.map(|g| (s.epsilon.ln(), g.max(1e-15).ln())))
        .collect();
    if points.len() < 4 {
        return Err(Error::InvalidParams(format!(
            "rate fit needs at least 4 admissible samples, got {}",
            points.len()
        )));
    }
    let exponent = least_squares_slope(&points);
    Ok(RateReport {
        psi_ref,
        exponent,
        envelope_exponent: 1.0 - p,
        c1,
        c2,
        samples,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// One growth-bound check row.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub xi1: Point2,
    pub xi2: Point2,
    pub distance: f64,
    pub lower: f64,
    pub upper: f64,
    pub growth_ok: bool,
    /// Distance between the original and snapped-endpoint problems.
    pub snap_gap: f64,
    pub snap_envelope: f64,
    pub snap_ok: bool,
}

/// Growth-bound suite over random endpoint pairs.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub admissible: bool,
    pub rows: Vec<BoundsRow>,
}

impl BoundsReport {
    pub fn violations(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| !(r.growth_ok && r.snap_ok))
            .count()
    }
}

/// Checks the growth bounds and the snapped-endpoint comparison on random
/// pairs in the unit cell (folded coordinates).
pub fn run_bounds_suite(
    shape: &InclusionShape,
    beta: f64,
    p: f64,
    eps: f64,
    n_pairs: usize,
    settings: &SolverSettings,
    seed: u64,
) -> Result<BoundsReport> {
    use rand::{Rng, SeedableRng};
    let params = MetricParams::new(beta, PExponent::Finite(p), eps)?;
    let lambda_hat = estimate_lambda(shape, LAMBDA_SAMPLES)?.lambda_hat;
    if !check_admissible(&params, lambda_hat).is_admissible() {
        return Ok(BoundsReport {
            admissible: false,
            rows: Vec::new(),
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(Point2, Point2)> = (0..n_pairs)
        .map(|_| {
            (
                Point2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
                Point2::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            )
        })
        .collect();
    let cap = beta * eps.powf(-p);
    let snap_env_base = 2.0 * beta * std::f64::consts::SQRT_2 * eps.powf(1.0 - p);
    let rows: Vec<BoundsRow> = pairs
        .par_iter()
        .map(|&(xi1, xi2)| -> Result<BoundsRow> {
            let d = distance_folded(shape, &params, xi1, xi2, settings)?.value;
            let sep = xi1.dist(xi2);
            let lower = sep;
            let upper = cap * sep;
            let growth_ok =
                d * (1.0 + TOL_GRID) >= lower && d * (1.0 - TOL_GRID) <= upper + 1e-12;
            let s1 = snap_to_matrix(shape, eps, xi1);
            let s2 = snap_to_matrix(shape, eps, xi2);
            let (snap_gap, snap_ok, snap_envelope) = if s1 == xi1 && s2 == xi2 {
                (0.0, true, snap_env_base)
            } else {
                let ds = distance_folded(shape, &params, s1, s2, settings)?.value;
                let gap = (d - ds).abs();
                let env = snap_env_base + TOL_GRID * (d + ds);
                (gap, gap <= env, env)
            };
            Ok(BoundsRow {
                xi1,
                xi2,
                distance: d,
                lower,
                upper,
                growth_ok,
                snap_gap,
                snap_envelope,
                snap_ok,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundsReport {
        admissible: true,
        rows,
    })
}
