//! Scratch diagnostics for tightening schedules.

use knots_core::geom::{thickness, Link, Point3};
use knots_core::io::FourierKnotSpec;
use knots_core::tighten::{
    active_rows, equilateralization_force, equilateralize, length_gradient, preprocess_link,
    project_onto_cone, PreprocessConfig, RowKey,
};

fn norm(f: &[Point3]) -> f64 {
    f.iter().map(|v| v.norm_sq()).sum::<f64>().sqrt()
}

fn main() {
    let k = FourierKnotSpec::figure_eight().sample(96).unwrap();
    let k = equilateralize(&k, 96).unwrap();
    let link = preprocess_link(&Link::single(k), &PreprocessConfig::default()).unwrap();
    let mut verts: Vec<Point3> = link.components[0].vertices().to_vec();
    let template = link.components[0].clone();

    let rebuild = |verts: &[Point3]| template.with_vertices(verts.to_vec()).unwrap();
    let mut rl = f64::INFINITY;

    let step_scale = 5e-3;
    let activation = 1.001;
    let mut reject_thick = 0usize;
    let mut reject_mono = 0usize;

    for phase in 1..=2 {
        let (budget, target, balance) = if phase == 1 {
            (6000usize, 0.004, true)
        } else {
            (9000usize, 0.001, false)
        };
        println!("== phase {phase} ==");
        let mut since = 0usize;
        let mut best = f64::INFINITY;
        let mut probes = 0usize;
        for step in 0..budget {
            // normalize
            let mut lk = Link::single(rebuild(&verts));
            let t = thickness(&lk).thickness;
            if (t - 1.0).abs() > 1e-13 {
                let c = lk.centroid();
                for v in &mut verts {
                    *v = c + (*v - c) / t;
                }
                lk = Link::single(rebuild(&verts));
            }
            rl = lk.total_length();
            let rows = active_rows(&lk, activation);
            let ncontact = rows.iter().filter(|r| matches!(r.key, RowKey::Contact(..))).count();
            let nturn = rows.len() - ncontact;
            let d: Vec<Point3> = length_gradient(&lk).iter().map(|&g| -g).collect();
            let pure = project_onto_cone(&rows, &d, None);
            let res = norm(&pure.p) / 96.0;
            if res <= target {
                println!("  step {step}: residual met {res:.5} rl {rl:.4}");
                break;
            }
            let proj = if balance {
                let bal = equilateralization_force(&lk);
                let mixed: Vec<Point3> =
                    d.iter().zip(&bal).map(|(&a, &b)| a + b).collect();
                project_onto_cone(&rows, &mixed, None)
            } else {
                pure
            };
            let base = step_scale * lk.mean_edge_length();
            let mut factor = 1.0f64;
            let mut moved = false;
            let mut first_reject = "";
            while factor >= 1e-12 {
                let trial: Vec<Point3> = verts
                    .iter()
                    .zip(&proj.p)
                    .map(|(&v, &q)| v + q * (base * factor))
                    .collect();
                let tl = Link::single(rebuild(&trial));
                let tb = thickness(&tl);
                if tb.thickness.is_finite() && tb.thickness >= 1.0 - 1e-9 {
                    let trl = tl.total_length() / tb.thickness;
                    if trl <= rl + 1e-9 {
                        verts = trial;
                        rl = trl;
                        moved = true;
                        break;
                    } else if first_reject.is_empty() {
                        first_reject = "mono";
                        reject_mono += 1;
                    }
                } else if first_reject.is_empty() {
                    first_reject = "thick";
                    reject_thick += 1;
                }
                factor *= 0.5;
            }
            if step % 250 == 0 || !moved {
                let tb = thickness(&Link::single(rebuild(&verts)));
                println!(
                    "  step {step}: rl {rl:.4} res {res:.5} rows {ncontact}c+{nturn}t \
                     minrad {:.4} dcsd/2 {:.4} factor {factor:.1e} rej1 {first_reject}",
                    tb.min_rad, tb.dcsd_half
                );
            }
            if (!moved || factor < 1e-6) && probes < 3 {
                probes += 1;
                println!("  PROBE step {step} (accepted factor {factor:.1e}):");
                let mut tight: Vec<(f64, String)> =
                    rows.iter().map(|r| (r.value, format!("{:?}", r.key))).collect();
                tight.sort_by(|a, b| a.0.total_cmp(&b.0));
                for (v, k) in tight.iter().take(8) {
                    println!("    row {k} = {v:.12}");
                }
                for pf in [1.0f64, 1e-2, 1e-4, 1e-6, 1e-8] {
                    let trial: Vec<Point3> = verts
                        .iter()
                        .zip(&proj.p)
                        .map(|(&v, &q)| v + q * (base * pf))
                        .collect();
                    let tb = thickness(&Link::single(rebuild(&trial)));
                    println!(
                        "    f {pf:.0e}: thick {:.12} minrad {:.12} dcsd/2 {:.12} gov {:?}",
                        tb.thickness, tb.min_rad, tb.dcsd_half, tb.governing
                    );
                }
                let now = thickness(&Link::single(rebuild(&verts)));
                println!(
                    "    now:  thick {:.12} minrad {:.12} dcsd/2 {:.12} gov {:?}",
                    now.thickness, now.min_rad, now.dcsd_half, now.governing
                );
            }
            if !moved {
                println!("  STALL(no-move) at step {step}");
                break;
            }
            if rl < best - 1e-8 {
                best = rl;
                since = 0;
            } else {
                since += 1;
                if since >= 500 {
                    println!("  STALL(window) at step {step} rl {rl:.4} res {res:.5}");
                    break;
                }
            }
        }
    }
    println!("rejections: thickness {reject_thick}, monotonicity {reject_mono}");

    // census of near-critical struts and turn radii at the end
    let lk = Link::single(rebuild(&verts));
    let rows = active_rows(&lk, 1.01);
    let mut turns: Vec<f64> = Vec::new();
    let mut struts: Vec<f64> = Vec::new();
    for r in &rows {
        match r.key {
            RowKey::Turn(_) => turns.push(r.value),
            RowKey::Contact(..) => struts.push(r.value),
        }
    }
    struts.sort_by(f64::total_cmp);
    turns.sort_by(f64::total_cmp);
    println!("struts<=2.02: {} tightest {:?}", struts.len(), &struts[..struts.len().min(6)]);
    println!("turns<=1.01: {} tightest {:?}", turns.len(), &turns[..turns.len().min(6)]);
    println!("final rl {rl:.4}");
}
