use hillfila_core::diagnostics::{inscription_radius, record, sup_vorticity, DiagnosticsParams};
use hillfila_core::geometry::{contains, revolved_diameter, revolved_volume};
use hillfila_core::scenario::hill_contour;
use hillfila_core::{AxiBall, Contour, HalfPlanePoint, PatchState, State, W_HILL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Random star-shaped radius `R(θ)` over `θ ∈ [-π/2, π/2]`, between 0.38 and 1.62.
struct Star {
    base: f64,
    modes: Vec<(f64, f64)>,
}

impl Star {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let base = rng.gen_range(0.8..1.2);
        let modes = (1..=4)
            .map(|k| (rng.gen_range(-0.2..0.2) / k as f64, rng.gen_range(0.0..PI)))
            .collect();
        Self { base, modes }
    }

    fn radius(&self, theta: f64) -> f64 {
        let s = theta + PI / 2.0;
        self.base
            + self
                .modes
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * ((k + 1) as f64 * s + ph).cos())
                .sum::<f64>()
    }

    fn contour(&self, n: usize) -> Contour {
        let nodes = (0..=n)
            .map(|k| {
                let th = -PI / 2.0 + PI * k as f64 / n as f64;
                let rad = self.radius(th);
                let r = if k == 0 || k == n {
                    0.0
                } else {
                    rad * th.cos()
                };
                HalfPlanePoint::new(r, rad * th.sin())
            })
            .collect();
        Contour::closed(nodes)
    }

    /// Volume of revolution, `(2π/3) ∫ R³ cos θ dθ`, by composite Simpson.
    fn volume(&self) -> f64 {
        let m = 20_000;
        let h = PI / m as f64;
        let f = |k: usize| {
            let th = -PI / 2.0 + k as f64 * h;
            self.radius(th).powi(3) * th.cos()
        };
        let mut s = f(0) + f(m);
        for k in 1..m {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k);
        }
        2.0 * PI / 3.0 * s * h / 3.0
    }
}

#[test]
fn contains_agrees_with_ball_predicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h_min = 0.005;
    for (zc, rad) in [(0.0, 1.0), (0.3, 0.8), (-2.0, 0.25)] {
        let ball = AxiBall::new(zc, rad).unwrap();
        let c = ball.cross_section(1024);
        let mut checked = 0;
        while checked < 10_000 {
            let p = HalfPlanePoint::new(
                rng.gen_range(0.0..1.3 * rad),
                zc + rng.gen_range(-1.3 * rad..1.3 * rad),
            );
            if (ball.center_distance(p) - rad).abs() <= h_min {
                continue;
            }
            assert_eq!(
                contains(&c, p),
                ball.contains(p),
                "{p:?} for ball ({zc}, {rad})"
            );
            checked += 1;
        }
    }
}

#[test]
fn sup_vorticity_is_attained_on_the_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let xi = 1.7;
    let h = 1.0 / 400.0;
    for _ in 0..5 {
        let star = Star::random(&mut rng);
        let c = star.contour(1000);
        let s = State::Patch(PatchState::new(0.0, vec![c.clone()], xi).unwrap());
        let (r_lo, r_hi, z_lo, z_hi) = c.bbox().unwrap();
        let mut best = 0.0f64;
        let mut i = 0;
        while r_lo + i as f64 * h <= r_hi {
            let r = r_lo + i as f64 * h;
            let mut j = 0;
            while z_lo + j as f64 * h <= z_hi {
                let p = HalfPlanePoint::new(r, z_lo + j as f64 * h);
                if contains(&c, p) {
                    best = best.max(r * xi);
                }
                j += 1;
            }
            i += 1;
        }
        let sup = sup_vorticity(&s);
        assert!(sup >= best, "interior sample {best} exceeds {sup}");
        assert!(sup - best <= 2.0 * h * xi, "{sup} vs brute force {best}");
    }
}

#[test]
fn star_volumes_match_polar_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        let star = Star::random(&mut rng);
        let v = revolved_volume(&star.contour(4000)).unwrap();
        let exact = star.volume();
        assert!((v - exact).abs() <= 1e-4 * exact, "{v} vs {exact}");
    }
}

#[test]
fn inscription_is_at_most_half_the_diameter() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut shapes: Vec<Contour> = (0..8)
        .map(|_| Star::random(&mut rng).contour(400))
        .collect();
    shapes.push(hill_contour(256).unwrap());
    shapes.push(AxiBall::new(0.3, 0.8).unwrap().cross_section(256));
    for c in &shapes {
        let ins = inscription_radius(std::slice::from_ref(c), 0.01);
        let d = revolved_diameter(c).unwrap();
        assert!(
            ins > 0.0 && ins <= 0.5 * d + 1e-12,
            "inscription {ins}, diameter {d}"
        );
    }
    let ball = inscription_radius(&shapes[9..], 0.01);
    assert!((ball - 0.8).abs() < 1e-3, "{ball}");
}

#[test]
fn speed_residual_of_translated_hill_states() {
    let mut params = DiagnosticsParams::new(1.0 / 32.0);
    params.with_energy = false;
    let ball = hill_contour(512).unwrap();
    for t in [0.5, 3.0, 10.0] {
        for lag in [0.0, 0.1, -0.07] {
            let shift = W_HILL * t + lag;
            let s = State::Patch(PatchState::new(t, vec![ball.translated(shift)], 1.0).unwrap());
            let rec = record(&s, W_HILL * t, &params).unwrap();
            assert!((rec.tau - shift).abs() < 1e-6, "tau {} vs {shift}", rec.tau);
            assert!((rec.speed_residual - lag.abs()).abs() < 1e-6);
            assert_eq!(
                rec.speed_residual <= 0.02 * (t + 1.0),
                lag.abs() <= 0.02 * (t + 1.0)
            );
        }
    }
}
