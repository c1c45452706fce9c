//! Scratch probe (ignored by default): prints the key quantities the
//! acceptance suite pins, for eyeballing scales and timings.

use incl2d::chaos::spanning_from_matrix;
use incl2d::conditions::{check_bv3, check_rs1, construct_v_from_fixed_point, InwardStop};
use incl2d::geom::Point;
use incl2d::inclusion::{BranchLabel, Tolerances};
use incl2d::metric::{distance_matrix, MetricConfig};
use incl2d::models::{self, Thm24Kind};
use incl2d::path::{PathGenerator, SwitchRule};
use incl2d::solution::{build_from_events, TimeWindow};
use std::time::Instant;

#[test]
#[ignore]
fn probe_spanning_and_timing() {
    let tol = Tolerances::default();
    let cfg = MetricConfig::default();

    let t0 = Instant::now();
    let cu = models::make_counterexample_u(&tol).unwrap();
    println!("build U ensembles: {:?}", t0.elapsed());
    println!("rbar members: {}", cu.rbar.len());

    for s in [1.0, 2.0, 5.0, 10.0] {
        let t = Instant::now();
        let mat = distance_matrix(&cu.rbar.members, s, &cfg).unwrap();
        let mut max_d = 0.0f64;
        for row in &mat {
            for &v in row {
                max_d = max_d.max(v);
            }
        }
        for eps in [0.5, 0.2, 0.1] {
            let r = spanning_from_matrix(&mat, s, eps);
            println!("s={s} eps={eps}: S={} (exact={})", r.s_nu, r.exact);
        }
        println!("  max pairwise dist {max_d:.5}, matrix time {:?}", t.elapsed());
    }

    for depth in [2usize, 3, 4] {
        let t = Instant::now();
        let ens = models::make_itinerary_ensemble(depth, &tol).unwrap();
        let s = depth as f64 * models::spiral_loop_period();
        let mat = distance_matrix(&ens.members, s, &cfg).unwrap();
        let mut min_off = f64::INFINITY;
        for i in 0..mat.len() {
            for j in 0..mat.len() {
                if i != j {
                    min_off = min_off.min(mat[i][j]);
                }
            }
        }
        let r = spanning_from_matrix(&mat, s, 0.05);
        println!(
            "depth {depth}: S={} of {} members, min off-diag {min_off:.4}, time {:?}",
            r.s_nu,
            ens.len(),
            t.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_thm24_pipeline() {
    let tol = Tolerances::default();
    let inst = models::make_thm24_instance(Thm24Kind::Spiral).unwrap();
    let t0 = Instant::now();
    let fixed = construct_v_from_fixed_point(
        &inst.inc,
        inst.a_star,
        inst.anchor,
        InwardStop::SectionReturn,
        &tol,
    )
    .unwrap();
    let closed_form = Point::new((-0.2 * std::f64::consts::PI).exp(), 0.0);
    println!(
        "construct_v: {:?}; landing {:?} vs closed form {:?} (gap {:.2e}); closure {:.2e}",
        t0.elapsed(),
        fixed.inward_landing,
        closed_form,
        fixed.inward_landing.dist(closed_form),
        fixed.closure_gap
    );
    let t1 = Instant::now();
    println!(
        "complement_unbounded(V) = {:?} in {:?}",
        fixed.v.complement_unbounded(),
        t1.elapsed()
    );
    let generator = PathGenerator::Loop {
        inc: &inst.inc,
        reference: &fixed.p,
        approach: BranchLabel::Branch2,
        horizon: 4.0 * models::spiral_loop_period(),
    };
    let t2 = Instant::now();
    let rs1 = check_rs1(&generator, &fixed.v, 50, 42, &tol);
    println!(
        "RS1: pass={} ({} instances) in {:?}",
        rs1.pass,
        rs1.sampled,
        t2.elapsed()
    );
    for i in rs1.instances.iter().filter(|i| !i.pass).take(5) {
        println!("  FAIL {}: {}", i.description, i.detail);
    }
    let t3 = Instant::now();
    let bv3 = check_bv3(
        &inst.inc,
        &generator,
        &fixed.v,
        20,
        4,
        43,
        &SwitchRule::Anywhere,
        &tol,
    );
    println!(
        "BV3: pass={} ({} chains) in {:?}",
        bv3.pass,
        bv3.sampled,
        t3.elapsed()
    );
    for i in bv3.instances.iter().filter(|i| !i.pass).take(5) {
        println!("  FAIL {}: {}", i.description, i.detail);
    }
}

#[test]
#[ignore]
fn probe_islm_cycle() {
    let tol = Tolerances::default();
    let params = models::EconParams::default();
    let inc = models::make_islm_qyml(&params).unwrap();
    let e1 = params.branch1_equilibrium().unwrap();
    let e2 = params.branch2_equilibrium().unwrap();
    println!("equilibria: recession {e1:?}, expansion {e2:?}");
    for (y_low, y_high, x0) in [
        (3.2, 4.4, Point::new(4.4, 1.3)),
        (3.3, 4.3, Point::new(4.3, 1.4)),
        (3.1, 4.2, Point::new(4.2, 1.5)),
    ] {
        let rule = models::islm_cycle_rule(y_low, y_high);
        let sol = build_from_events(
            &inc,
            x0,
            BranchLabel::Branch1,
            &rule,
            TimeWindow::new(-1.0, 80.0).unwrap(),
            60.0,
            &tol,
        );
        match sol {
            Ok(sol) => {
                let report = models::detect_cycle_phases(&sol);
                let kinds: Vec<String> =
                    report.switches.iter().map(|s| format!("{:?}@{:.2}", s.kind, s.t)).collect();
                println!(
                    "y_low={y_low} y_high={y_high} x0={x0:?}: {} switches: {:?}",
                    report.switches.len(),
                    &kinds[..kinds.len().min(10)]
                );
            }
            Err(e) => println!("y_low={y_low} y_high={y_high}: ERROR {e}"),
        }
    }
}
