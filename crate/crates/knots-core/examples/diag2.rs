//! Scratch probe: figure-eight seed variants vs the 55.5 trap basin.

use knots_core::invariants::space_writhe;
use knots_core::io::{FourierKnotSpec, FourierSeries};
use knots_core::tighten::{equilateralize, preprocess, PreprocessConfig, TighteningConfig};
use knots_core::topology::knot_determinant;
use knots_core::PolygonalKnot;

struct TestRng(u64);
impl TestRng {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

fn fig8(z_amp: f64) -> FourierKnotSpec {
    FourierKnotSpec {
        x: FourierSeries { cos: vec![0.5, 0.0, 2.0, 0.0, 0.5], sin: vec![] },
        y: FourierSeries { cos: vec![], sin: vec![0.5, 0.0, 2.0, 0.0, 0.5] },
        z: FourierSeries { cos: vec![], sin: vec![0.0, 0.0, 0.0, z_amp] },
    }
}

fn perturb(knot: &PolygonalKnot, amp: f64, seed: u64) -> PolygonalKnot {
    let mut rng = TestRng(seed);
    let mean_edge = knot.total_length() / knot.len() as f64;
    let verts = knot
        .vertices()
        .iter()
        .map(|p| {
            let d = knots_core::Point3::new(rng.next_f64(), rng.next_f64(), rng.next_f64());
            *p + d * (amp * mean_edge)
        })
        .collect();
    PolygonalKnot::new(verts).unwrap()
}

fn run(label: &str, start: &PolygonalKnot, steps: usize) {
    let det = knot_determinant(start, 7).map(|d| d.to_string()).unwrap_or("?".into());
    let pre = preprocess(start, &PreprocessConfig::default()).unwrap();
    let det_pre = knot_determinant(&pre, 7).map(|d| d.to_string()).unwrap_or("?".into());
    let cfg = TighteningConfig {
        phase1_max_steps: steps,
        phase1_residual_target: 1e-300,
        phase2_max_steps: 0,
        ..TighteningConfig::benchmark()
    };
    let t0 = std::time::Instant::now();
    let (out, rep) = knots_core::tighten::tighten(&pre, &cfg).unwrap();
    println!(
        "{label}: det {det}->{det_pre}  rl {:.4}  res {:.5}  wr {:+.4}  ({:.0}s)",
        rep.final_ropelength,
        rep.final_residual,
        space_writhe(&out),
        t0.elapsed().as_secs_f64()
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");
    let steps: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3500);

    let fine = fig8(1.0).sample(512).unwrap();
    println!(
        "fine-512 det {}",
        knot_determinant(&fine, 7).map(|d| d.to_string()).unwrap_or("?".into())
    );

    let base = |n: usize| equilateralize(&fig8(1.0).sample(4 * n).unwrap(), n).unwrap();

    if which == "all" || which == "z16" {
        let k = equilateralize(&fig8(1.6).sample(384).unwrap(), 96).unwrap();
        run("z1.6-96", &k, steps);
    }
    if which == "all" || which == "z22" {
        let k = equilateralize(&fig8(2.2).sample(384).unwrap(), 96).unwrap();
        run("z2.2-96", &k, steps);
    }
    if which == "all" || which == "pert" {
        let k = perturb(&base(96), 0.4, 12345);
        run("pert-96", &k, steps);
    }
    if which == "all" || which == "base" {
        run("base-96", &base(96), steps);
    }
}
