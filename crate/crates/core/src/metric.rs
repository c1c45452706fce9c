//! The solution-space metric ν(x,y) = sup_t min{d(x(t),y(t)),1} / 2^{|t|},
//! discretized on a uniform grid with an analytic tail bound, plus the two
//! orbit-segment distances built from it.
//!
//! Over a horizon s there are two distinct quantities:
//!
//! * [`orbit_separation`] shifts both solutions together and takes the max —
//!   the literal orbit-segment formula, monotone nondecreasing in s. This is
//!   what sensitivity sweeps measure.
//! * [`orbit_metric`] additionally minimizes over a relative alignment shift
//!   r ∈ [−s, s] of one solution against the other. Two phases of one
//!   periodic cycle become identified once s reaches half the period, which
//!   is the quantity the spanning-set and entropy collapse computations rely
//!   on. It is not monotone across the alignment threshold.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::solution::SolutionWindow;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Discretization of sup-over-time (time units).
    pub grid: f64,
    /// Restrict evaluation to [−T, T]; None uses the full common window.
    pub eval_half_window: Option<f64>,
    /// Coarse step of the alignment scan in `orbit_metric`, refined to
    /// `grid` around the best candidate.
    pub align_step: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            grid: 1e-2,
            eval_half_window: None,
            align_step: 2e-2,
        }
    }
}

/// A reported metric value together with the window-truncation bound:
/// the tail beyond the common window contributes at most 2^{−T}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NuValue {
    pub value: f64,
    pub trunc_bound: f64,
}

/// Pointwise ingredient ν_t(x,y) = min{d(x(t), y(t)), 1}.
pub fn nu_t(x: &SolutionWindow, y: &SolutionWindow, t: f64) -> Result<f64> {
    let a = x.eval(t)?;
    let b = y.eval(t)?;
    Ok(a.dist(b).min(1.0))
}

/// A solution resampled on the absolute uniform grid {k·step}. Two tracks
/// with the same step align index-wise, which makes pairwise scans cheap.
#[derive(Debug, Clone)]
pub struct Track {
    /// Absolute grid index of pts[0]; sample i sits at (k0 + i)·step.
    pub k0: i64,
    pub step: f64,
    pub pts: Vec<Point>,
}

impl Track {
    pub fn from_solution(sol: &SolutionWindow, step: f64) -> Track {
        let k_lo = (sol.window.t0 / step).ceil() as i64;
        let k_hi = (sol.window.t1 / step).floor() as i64;
        let pts = (k_lo..=k_hi)
            .map(|k| {
                sol.eval((k as f64 * step).clamp(sol.window.t0, sol.window.t1))
                    .expect("grid time inside window")
            })
            .collect();
        Track {
            k0: k_lo,
            step,
            pts,
        }
    }

    fn k_hi(&self) -> i64 {
        self.k0 + self.pts.len() as i64 - 1
    }

    #[inline]
    fn at(&self, k: i64) -> Point {
        self.pts[(k - self.k0) as usize]
    }
}

/// ν over tracks, with x pre-shifted by `x_shift` grid steps:
/// sup_α min{d(x(x_shift·h + α), y(α)), 1} / 2^{|α|}.
pub(crate) fn nu_tracks(
    xt: &Track,
    yt: &Track,
    x_shift: i64,
    eval_half: Option<f64>,
) -> Result<NuValue> {
    let step = xt.step;
    let mut lo = (xt.k0 - x_shift).max(yt.k0);
    let mut hi = (xt.k_hi() - x_shift).min(yt.k_hi());
    if let Some(t) = eval_half {
        let half = (t / step).floor() as i64;
        lo = lo.max(-half);
        hi = hi.min(half);
    }
    if lo > hi {
        return Err(Error::OutsideWindow {
            t: x_shift as f64 * step,
            lo: yt.k0 as f64 * step,
            hi: yt.k_hi() as f64 * step,
        });
    }
    let mut best = 0.0f64;
    for k in lo..=hi {
        let m = xt.at(k + x_shift).dist(yt.at(k)).min(1.0);
        let w = 0.5f64.powf((k as f64 * step).abs());
        let v = m * w;
        if v > best {
            best = v;
        }
    }
    let t_common = ((-lo).min(hi)).max(0) as f64 * step;
    Ok(NuValue {
        value: best,
        trunc_bound: 0.5f64.powf(t_common),
    })
}

/// ν(x,y): max over the grid of ν_t/2^{|t|} on the common window, reported
/// with the truncation bound (a certified lower bound on the true sup).
pub fn nu(x: &SolutionWindow, y: &SolutionWindow, cfg: &MetricConfig) -> Result<NuValue> {
    let xt = Track::from_solution(x, cfg.grid);
    let yt = Track::from_solution(y, cfg.grid);
    nu_tracks(&xt, &yt, 0, cfg.eval_half_window)
}

/// Weight of the orbit-segment sup at absolute grid index k for horizon
/// s_steps: 1 inside [−s, s], decaying by 2^{−dist} outside.
#[inline]
fn horizon_weight(k: i64, s_steps: i64, step: f64) -> f64 {
    let excess = (k.abs() - s_steps).max(0);
    if excess == 0 {
        1.0
    } else {
        0.5f64.powf(excess as f64 * step)
    }
}

/// max over |t| ≤ s of ν(T_t x, T_t y), collapsed to a single weighted sup:
/// sup_α m(α)·w_s(α) with m(α) = min{d(x(α), y(α)), 1}. `abort_above`
/// short-circuits the scan once the value cannot stay below it.
fn common_shift_sup(xt: &Track, yt: &Track, r: i64, s_steps: i64, abort_above: f64) -> f64 {
    let step = xt.step;
    let lo = xt.k0.max(yt.k0 - r);
    let hi = xt.k_hi().min(yt.k_hi() - r);
    if lo > hi {
        return f64::INFINITY;
    }
    let mut best = 0.0f64;

    macro_rules! scan {
        ($k:expr) => {{
            let k: i64 = $k;
            let m = xt.at(k).dist(yt.at(k + r)).min(1.0);
            let v = m * horizon_weight(k, s_steps, step);
            if v > best {
                best = v;
                if best > abort_above {
                    return best;
                }
            }
        }};
    }

    // weight-1 zone first: aborts almost always trigger here
    for k in lo.max(-s_steps)..=hi.min(s_steps) {
        scan!(k);
    }
    // tails: weight decays monotonically, so stop once it cannot beat `best`
    for k in (s_steps + 1).max(lo)..=hi {
        if horizon_weight(k, s_steps, step) <= best {
            break;
        }
        scan!(k);
    }
    let mut k = (-s_steps - 1).min(hi);
    while k >= lo {
        if horizon_weight(k, s_steps, step) <= best {
            break;
        }
        scan!(k);
        k -= 1;
    }
    best
}

fn check_horizon(x: &SolutionWindow, y: &SolutionWindow, s: f64) -> Result<()> {
    let t_common = (-x.window.t0)
        .min(-y.window.t0)
        .min(x.window.t1)
        .min(y.window.t1);
    if s > t_common + 1e-9 {
        return Err(Error::WindowExhausted {
            shift: s,
            lo: -t_common,
            hi: t_common,
        });
    }
    Ok(())
}

/// The literal orbit-segment distance max_{|t| ≤ s} ν(T_t x, T_t y):
/// both solutions shifted together. Monotone nondecreasing in s.
pub fn orbit_separation(
    x: &SolutionWindow,
    y: &SolutionWindow,
    s: f64,
    cfg: &MetricConfig,
) -> Result<f64> {
    check_horizon(x, y, s)?;
    let xt = Track::from_solution(x, cfg.grid);
    let yt = Track::from_solution(y, cfg.grid);
    let s_steps = (s / cfg.grid).round() as i64;
    Ok(common_shift_sup(&xt, &yt, 0, s_steps, f64::INFINITY))
}

pub(crate) fn orbit_separation_tracks(xt: &Track, yt: &Track, s: f64) -> f64 {
    let s_steps = (s / xt.step).round() as i64;
    common_shift_sup(xt, yt, 0, s_steps, f64::INFINITY)
}

/// True iff ν(T_t x, y) < eps, with t given in grid steps. Contributions
/// with weight below eps cannot reach the threshold, so the scan is bounded
/// to |α| ≤ log2(1/eps).
pub(crate) fn nu_below_eps(xt: &Track, yt: &Track, x_shift: i64, eps: f64) -> bool {
    let step = xt.step;
    let reach = ((1.0 / eps).log2() / step).ceil() as i64;
    let lo = (xt.k0 - x_shift).max(yt.k0).max(-reach);
    let hi = (xt.k_hi() - x_shift).min(yt.k_hi()).min(reach);
    for k in lo..=hi {
        let m = xt.at(k + x_shift).dist(yt.at(k)).min(1.0);
        if m * 0.5f64.powf((k as f64 * step).abs()) >= eps {
            return false;
        }
    }
    true
}

pub(crate) fn orbit_metric_tracks(
    xt: &Track,
    yt: &Track,
    s: f64,
    cfg: &MetricConfig,
) -> f64 {
    let s_steps = (s / cfg.grid).round() as i64;
    let coarse = ((cfg.align_step / cfg.grid).round() as i64).max(1);

    let directed = |a: &Track, b: &Track| -> f64 {
        let mut best = f64::INFINITY;
        let mut best_r = 0i64;
        let mut r = -s_steps;
        while r <= s_steps {
            let v = common_shift_sup(a, b, r, s_steps, best);
            if v < best {
                best = v;
                best_r = r;
            }
            r += coarse;
        }
        for r in (best_r - coarse + 1)..(best_r + coarse) {
            if r.abs() > s_steps || r == best_r {
                continue;
            }
            let v = common_shift_sup(a, b, r, s_steps, best);
            if v < best {
                best = v;
            }
        }
        best
    };

    directed(xt, yt).max(directed(yt, xt))
}

/// Orbit-segment distance with phase alignment: min over a relative shift
/// r ∈ [−s, s] of max_{|t| ≤ s} ν(T_t x, T_{t+r} y), symmetrized. Distinct
/// phases of one periodic cycle collapse to ~0 once s ≥ τ/2.
pub fn orbit_metric(
    x: &SolutionWindow,
    y: &SolutionWindow,
    s: f64,
    cfg: &MetricConfig,
) -> Result<f64> {
    check_horizon(x, y, s)?;
    let xt = Track::from_solution(x, cfg.grid);
    let yt = Track::from_solution(y, cfg.grid);
    Ok(orbit_metric_tracks(&xt, &yt, s, cfg))
}

/// Pairwise orbit-metric matrix over an ensemble (tracks built once).
pub fn distance_matrix(
    members: &[SolutionWindow],
    s: f64,
    cfg: &MetricConfig,
) -> Result<Vec<Vec<f64>>> {
    for m in members {
        check_horizon(m, m, s)?;
    }
    let tracks: Vec<Track> = members
        .iter()
        .map(|m| Track::from_solution(m, cfg.grid))
        .collect();
    let n = members.len();
    let mut mat = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = orbit_metric_tracks(&tracks[i], &tracks[j], s, cfg);
            mat[i][j] = d;
            mat[j][i] = d;
        }
    }
    Ok(mat)
}
