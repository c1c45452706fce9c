//! Chaos indicators over finite ensembles: (s,ε)-spanning numbers and the
//! topological-entropy growth estimate, approximate ω-limit sets, the
//! ω-scrambled conditions, and the three Devaney components.
//!
//! A finite ensemble can witness growth but never certify a supremum over
//! the full solution set, so every entropy figure is a lower bound and the
//! uncountability condition of ω-chaos is replaced by a refinement-growth
//! proxy, labelled as such in the reports.

use crate::error::{Error, Result};
use crate::inclusion::Tolerances;
use crate::metric::{
    distance_matrix, nu_below_eps, orbit_separation_tracks, MetricConfig, Track,
};
use crate::solution::{detect_period, Ensemble};
use serde::{Deserialize, Serialize};

/// Largest ensemble for which the minimal set cover is computed exactly.
pub const EXACT_COVER_LIMIT: usize = 20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpanningResult {
    pub s: f64,
    pub eps: f64,
    pub s_nu: usize,
    /// Member indices of the chosen cover centers.
    pub cover: Vec<usize>,
    pub exact: bool,
    /// ln(n) + 1 bound when the greedy fallback was used.
    pub approx_factor: Option<f64>,
}

fn greedy_cover(covers: &[u64], full: u64) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut covered = 0u64;
    while covered != full {
        let (best, gain) = covers
            .iter()
            .enumerate()
            .map(|(i, &c)| (i, (c & !covered).count_ones()))
            .max_by_key(|&(_, g)| g)
            .unwrap();
        if gain == 0 {
            break;
        }
        chosen.push(best);
        covered |= covers[best];
    }
    chosen
}

fn exact_min_cover(covers: &[u64], full: u64) -> Vec<usize> {
    let mut best = greedy_cover(covers, full);

    fn dfs(
        covers: &[u64],
        full: u64,
        covered: u64,
        chosen: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        if covered == full {
            if chosen.len() < best.len() {
                *best = chosen.clone();
            }
            return;
        }
        if chosen.len() + 1 >= best.len() {
            return;
        }
        let e = (!covered & full).trailing_zeros() as usize;
        for (i, &c) in covers.iter().enumerate() {
            if c & (1u64 << e) != 0 {
                chosen.push(i);
                dfs(covers, full, covered | c, chosen, best);
                chosen.pop();
            }
        }
    }

    let mut chosen = Vec::new();
    dfs(covers, full, 0, &mut chosen, &mut best);
    best
}

fn cover_from_matrix(mat: &[Vec<f64>], eps: f64) -> (Vec<usize>, bool, Option<f64>) {
    let n = mat.len();
    let covers: Vec<u64> = (0..n)
        .map(|i| {
            let mut m = 0u64;
            for j in 0..n {
                if i == j || mat[i][j] < eps {
                    m |= 1 << j;
                }
            }
            m
        })
        .collect();
    let full = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
    if n <= EXACT_COVER_LIMIT {
        (exact_min_cover(&covers, full), true, None)
    } else {
        (
            greedy_cover(&covers, full),
            false,
            Some((n as f64).ln() + 1.0),
        )
    }
}

/// Minimal-cardinality subcover of the ensemble by orbit-metric balls
/// B(x, ε, s); exact via branch-and-bound for ensembles within
/// [`EXACT_COVER_LIMIT`], greedy with the stated factor beyond.
pub fn spanning_number(
    ens: &Ensemble,
    s: f64,
    eps: f64,
    cfg: &MetricConfig,
) -> Result<SpanningResult> {
    let mat = distance_matrix(&ens.members, s, cfg)?;
    Ok(spanning_from_matrix(&mat, s, eps))
}

pub fn spanning_from_matrix(mat: &[Vec<f64>], s: f64, eps: f64) -> SpanningResult {
    let (cover, exact, approx_factor) = cover_from_matrix(mat, eps);
    SpanningResult {
        s,
        eps,
        s_nu: cover.len(),
        cover,
        exact,
        approx_factor,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyRow {
    pub eps: f64,
    pub s: f64,
    pub s_nu: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    pub ensemble: String,
    pub rows: Vec<EntropyRow>,
    /// (ε, (1/s)·ln S_ν at the largest s) per ε.
    pub slopes: Vec<(f64, f64)>,
    /// Slope at the smallest ε and largest s. A finite ensemble can only
    /// certify growth, so this is a LOWER BOUND on h_top.
    pub h_top_estimate: f64,
    pub lower_bound: bool,
    pub method: String,
}

/// Full (ε, s) spanning table with slope fits.
pub fn entropy_estimate(
    ens: &Ensemble,
    eps_list: &[f64],
    s_list: &[f64],
    cfg: &MetricConfig,
) -> Result<EntropyReport> {
    if eps_list.is_empty() || s_list.is_empty() {
        return Err(Error::Parameter("empty entropy grids".into()));
    }
    let mut rows = Vec::new();
    let mut any_greedy = false;
    for &s in s_list {
        let mat = distance_matrix(&ens.members, s, cfg)?;
        for &eps in eps_list {
            let r = spanning_from_matrix(&mat, s, eps);
            any_greedy |= !r.exact;
            rows.push(EntropyRow {
                eps,
                s,
                s_nu: r.s_nu,
                exact: r.exact,
            });
        }
    }
    let s_max = s_list.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let slopes: Vec<(f64, f64)> = eps_list
        .iter()
        .map(|&eps| {
            let s_nu = rows
                .iter()
                .find(|r| r.eps == eps && r.s == s_max)
                .map(|r| r.s_nu)
                .unwrap_or(1);
            (eps, (s_nu as f64).ln() / s_max)
        })
        .collect();
    let eps_min = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let h = slopes
        .iter()
        .find(|(e, _)| *e == eps_min)
        .map(|&(_, v)| v)
        .unwrap_or(0.0);
    Ok(EntropyReport {
        ensemble: ens.name.clone(),
        rows,
        slopes,
        h_top_estimate: h,
        lower_bound: true,
        method: if any_greedy {
            "greedy".into()
        } else {
            "exact".into()
        },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaEntry {
    pub member: usize,
    /// Members recurrently approached by late shifts of this one.
    pub omega: Vec<usize>,
    pub periodic: bool,
    pub period: Option<f64>,
    /// Horizon shorter than three detected periods.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmegaReport {
    pub ensemble: String,
    pub horizon: f64,
    pub eps: f64,
    pub entries: Vec<OmegaEntry>,
}

/// Approximate ω-limit of one member within the ensemble: members y with
/// ν(T_t x, y) < ε at three or more increasing shift times in the upper
/// half of the horizon.
pub fn omega_limit(
    ens: &Ensemble,
    member: usize,
    horizon: f64,
    eps: f64,
    cfg: &MetricConfig,
    tol: &Tolerances,
) -> Result<OmegaEntry> {
    let w = ens.window();
    if horizon > w.t1 {
        return Err(Error::Parameter(format!(
            "horizon {horizon} exceeds window end {}",
            w.t1
        )));
    }
    let x = &ens.members[member];
    let period = detect_period(x, tol);
    let inconclusive = period.is_none_or(|p| horizon < 3.0 * p);

    let xt = Track::from_solution(x, cfg.grid);
    let tracks: Vec<Track> = ens
        .members
        .iter()
        .map(|m| Track::from_solution(m, cfg.grid))
        .collect();

    let shift_steps = (horizon / cfg.grid).floor() as i64;
    let half = shift_steps / 2;
    let mut omega = Vec::new();
    for (j, yt) in tracks.iter().enumerate() {
        let mut hits = 0;
        let mut k = half;
        while k <= shift_steps {
            if nu_below_eps(&xt, yt, k, eps) {
                hits += 1;
                if hits >= 3 {
                    omega.push(j);
                    break;
                }
                // skip past this encounter before counting the next
                k += (0.5 / cfg.grid) as i64;
            }
            k += 1;
        }
    }
    Ok(OmegaEntry {
        member,
        omega,
        periodic: period.is_some(),
        period,
        inconclusive,
    })
}

pub fn omega_report(
    ens: &Ensemble,
    horizon: f64,
    eps: f64,
    cfg: &MetricConfig,
    tol: &Tolerances,
) -> Result<OmegaReport> {
    let entries = (0..ens.len())
        .map(|i| omega_limit(ens, i, horizon, eps, cfg, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(OmegaReport {
        ensemble: ens.name.clone(),
        horizon,
        eps,
        entries,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScrambledCondition {
    pub pass: bool,
    pub evidence: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScrambledVerdict {
    pub x: usize,
    pub y: usize,
    /// ω(x) ∖ ω(y) uncountable — PROXY: the difference count must grow
    /// strictly under ensemble refinement.
    pub condition1_proxy: ScrambledCondition,
    /// ω(x) ∩ ω(y) nonempty.
    pub condition2: ScrambledCondition,
    /// ω(x) not contained in the periodic members.
    pub condition3: ScrambledCondition,
    pub scrambled: bool,
}

/// Evaluate the three ω-scrambled conditions for a member pair.
/// `levels` are ensemble refinements (coarsest first; the pair keeps its
/// indices in every level); condition 1 is the refinement-growth proxy.
pub fn omega_scrambled_check(
    levels: &[Ensemble],
    x: usize,
    y: usize,
    horizon: f64,
    eps: f64,
    cfg: &MetricConfig,
    tol: &Tolerances,
) -> Result<ScrambledVerdict> {
    if levels.is_empty() {
        return Err(Error::Parameter("need at least one ensemble level".into()));
    }
    if x == y {
        let fail = ScrambledCondition {
            pass: false,
            evidence: "x = y: a scrambled set needs two distinct solutions".into(),
        };
        return Ok(ScrambledVerdict {
            x,
            y,
            condition1_proxy: fail.clone(),
            condition2: fail.clone(),
            condition3: fail,
            scrambled: false,
        });
    }

    let mut diff_counts = Vec::new();
    for lvl in levels {
        let ox = omega_limit(lvl, x, horizon, eps, cfg, tol)?;
        let oy = omega_limit(lvl, y, horizon, eps, cfg, tol)?;
        let diff = ox.omega.iter().filter(|i| !oy.omega.contains(i)).count();
        diff_counts.push(diff);
    }
    let growing = diff_counts.windows(2).all(|w| w[1] > w[0]) && diff_counts[0] > 0;
    let condition1_proxy = ScrambledCondition {
        pass: levels.len() >= 2 && growing,
        evidence: format!("PROXY |ω(x)∖ω(y)| across refinements: {diff_counts:?}"),
    };

    let base = &levels[0];
    let ox = omega_limit(base, x, horizon, eps, cfg, tol)?;
    let oy = omega_limit(base, y, horizon, eps, cfg, tol)?;
    let inter: Vec<usize> = ox
        .omega
        .iter()
        .copied()
        .filter(|i| oy.omega.contains(i))
        .collect();
    let condition2 = ScrambledCondition {
        pass: !inter.is_empty(),
        evidence: format!("|ω(x)∩ω(y)| = {}", inter.len()),
    };

    let periodic: Vec<bool> = base
        .members
        .iter()
        .map(|m| detect_period(m, tol).is_some())
        .collect();
    let nonperiodic_in_omega: Vec<usize> = ox
        .omega
        .iter()
        .copied()
        .filter(|&i| !periodic[i])
        .collect();
    let condition3 = ScrambledCondition {
        pass: !nonperiodic_in_omega.is_empty(),
        evidence: if nonperiodic_in_omega.is_empty() {
            "every member of ω(x) is periodic".into()
        } else {
            format!("non-periodic members in ω(x): {nonperiodic_in_omega:?}")
        },
    };

    let scrambled = condition1_proxy.pass && condition2.pass && condition3.pass;
    Ok(ScrambledVerdict {
        x,
        y,
        condition1_proxy,
        condition2,
        condition3,
        scrambled,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DevaneyParams {
    /// Ball radius for transitivity and periodic density.
    pub eps: f64,
    /// Shift horizon for orbit passes and separation sweeps.
    pub horizon: f64,
    /// Grid of shift times for transitivity passes.
    pub shift_grid: f64,
}

impl Default for DevaneyParams {
    fn default() -> Self {
        DevaneyParams {
            eps: 0.2,
            horizon: 6.0,
            shift_grid: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityRefutation {
    pub member: usize,
    pub delta: f64,
    pub eps: f64,
    pub companions: usize,
    pub max_separation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DevaneyReport {
    pub ensemble: String,
    pub params: DevaneyParams,
    pub transitive: bool,
    pub periodic_dense: bool,
    pub sensitive: bool,
    /// Largest grid δ that survives refutation, when sensitive.
    pub sensitivity_delta: Option<f64>,
    /// Member and ball on which every companion stays within δ at every
    /// tested shift (the smallest grid δ), when not sensitive.
    pub refutation: Option<SensitivityRefutation>,
}

/// Evaluate topological transitivity, density of periodic members, and
/// sensitive dependence relative to the finite ensemble. Sensitivity scans
/// δ over powers of two 2^{-10}..2^{-1}; a δ is refuted by a member and an
/// ε-ball all of whose companions stay within δ at every tested shift.
pub fn devaney_check(
    ens: &Ensemble,
    params: &DevaneyParams,
    cfg: &MetricConfig,
    tol: &Tolerances,
) -> Result<DevaneyReport> {
    let n = ens.len();
    let tracks: Vec<Track> = ens
        .members
        .iter()
        .map(|m| Track::from_solution(m, cfg.grid))
        .collect();

    // pairwise ν and common-shift separation, computed once
    let mut nu_mat = vec![vec![0.0f64; n]; n];
    let mut sep_mat = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = crate::metric::nu_tracks(&tracks[i], &tracks[j], 0, cfg.eval_half_window)?;
            nu_mat[i][j] = v.value;
            nu_mat[j][i] = v.value;
            let sep = orbit_separation_tracks(&tracks[i], &tracks[j], params.horizon);
            sep_mat[i][j] = sep;
            sep_mat[j][i] = sep;
        }
    }

    // transitivity: some member's shifts pass from every ball to every ball
    let shift_steps = (params.horizon / cfg.grid).floor() as i64;
    let stride = ((params.shift_grid / cfg.grid).round() as i64).max(1);
    let mut pass_times: Vec<Vec<Vec<i64>>> = vec![vec![Vec::new(); n]; n];
    for z in 0..n {
        for target in 0..n {
            let mut k = 0;
            while k <= shift_steps {
                if nu_below_eps(&tracks[z], &tracks[target], k, params.eps) {
                    pass_times[z][target].push(k);
                }
                k += stride;
            }
        }
    }
    let mut transitive = true;
    'outer: for x in 0..n {
        for y in 0..n {
            let ok = (0..n).any(|z| {
                let tx = &pass_times[z][x];
                let ty = &pass_times[z][y];
                match (tx.first(), ty.last()) {
                    (Some(&a), Some(&b)) => a < b,
                    _ => false,
                }
            });
            if !ok {
                transitive = false;
                break 'outer;
            }
        }
    }

    // density of periodic members
    let periodic: Vec<bool> = ens
        .members
        .iter()
        .map(|m| detect_period(m, tol).is_some())
        .collect();
    let periodic_dense = (0..n)
        .all(|i| periodic[i] || (0..n).any(|j| j != i && periodic[j] && nu_mat[i][j] < params.eps));

    // sensitivity over the δ-grid
    let deltas: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
    let eps_grid: Vec<f64> = (1..=10).map(|k| 0.5f64.powi(k)).collect();
    let mut sensitive_delta: Option<f64> = None;
    let mut refutation: Option<SensitivityRefutation> = None;
    for &delta in &deltas {
        let mut refuted = None;
        'member: for x in 0..n {
            for &eps in &eps_grid {
                let companions: Vec<usize> =
                    (0..n).filter(|&z| z != x && nu_mat[x][z] < eps).collect();
                if companions.iter().all(|&z| sep_mat[x][z] <= delta) {
                    let max_sep = companions
                        .iter()
                        .map(|&z| sep_mat[x][z])
                        .fold(0.0f64, f64::max);
                    refuted = Some(SensitivityRefutation {
                        member: x,
                        delta,
                        eps,
                        companions: companions.len(),
                        max_separation: max_sep,
                    });
                    break 'member;
                }
            }
        }
        match refuted {
            Some(r) => {
                if refutation.is_none() {
                    refutation = Some(r);
                }
            }
            None => {
                sensitive_delta = Some(delta.max(sensitive_delta.unwrap_or(0.0)));
            }
        }
    }
    let sensitive = sensitive_delta.is_some();

    Ok(DevaneyReport {
        ensemble: ens.name.clone(),
        params: *params,
        transitive,
        periodic_dense,
        sensitive,
        sensitivity_delta: sensitive_delta,
        refutation: if sensitive { None } else { refutation },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cover_minimal_on_small_instances() {
        let covers = vec![0b011u64, 0b110, 0b100];
        let cover = exact_min_cover(&covers, 0b111);
        assert_eq!(cover.len(), 2);
        let covers = vec![0b111u64, 0b011, 0b001];
        assert_eq!(exact_min_cover(&covers, 0b111).len(), 1);
    }

    #[test]
    fn greedy_at_least_exact_on_chain() {
        let covers: Vec<u64> = (0..10).map(|i| 0b11u64 << i).collect();
        let full = (1u64 << 11) - 1;
        let g = greedy_cover(&covers, full);
        let e = exact_min_cover(&covers, full);
        assert!(g.len() >= e.len());
        assert!(e.len() <= 6);
    }

    #[test]
    fn spanning_from_matrix_singleton() {
        let mat = vec![vec![0.0]];
        let r = spanning_from_matrix(&mat, 1.0, 0.5);
        assert_eq!(r.s_nu, 1);
        assert!(r.exact);
    }

    #[test]
    fn spanning_separated_points_need_own_balls() {
        let n = 4;
        let mut mat = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    mat[i][j] = 0.9;
                }
            }
        }
        let r = spanning_from_matrix(&mat, 1.0, 0.05);
        assert_eq!(r.s_nu, n);
    }
}
