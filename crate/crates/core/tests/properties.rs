//! Property tests of the public API across the system zoo.

use ergokit::classify::{attracting_test_from, birkhoff_measure, classical_correlation};
use ergokit::coarse::{approx_error_check, coarse_grain_detailed, greedy_bisep};
use ergokit::measure::{bl_distance, Support};
use ergokit::numeric::split_seed;
use ergokit::systems::{b2_prime, build_system, default_neighbourhood, CounterexampleParams, ZooParams};
use ergokit::{BowenContext, DensitySpec, MetricSpace, ParticleMeasure, Point, ProbeConfig, SystemSpec, TestFunction, TimeKind};
use proptest::prelude::*;

const COVER_SYSTEMS: [&str; 6] = ["doubling", "cat", "rotation", "doubling_contract", "identity", "planar_rotation"];

fn sys(id: &str) -> SystemSpec<f64> {
    build_system(id, &ZooParams::default()).unwrap()
}

fn torus_sample(n: usize, seed: u64) -> ParticleMeasure<f64> {
    DensitySpec::uniform(MetricSpace::torus(2), Support::boxed(vec![0.0, 0.0], vec![1.0, 1.0])).sample(n, seed).unwrap()
}

/// Points within Bowen distance `delta` of `c`, found by shrinking a random offset.
fn near_point(ctx: &BowenContext<f64>, c: &Point<f64>, delta: f64, seed: u64) -> Point<f64> {
    let d = c.dim();
    let mut scale = delta;
    for k in 0..60 {
        let off: Vec<f64> = (0..d)
            .map(|i| {
                let u = (split_seed(seed, (k * d + i) as u64) >> 11) as f64 / (1u64 << 53) as f64;
                (2.0 * u - 1.0) * scale / (d as f64).sqrt()
            })
            .collect();
        let mut y = Point(c.coords().iter().zip(&off).map(|(a, b)| a + b).collect());
        ctx.system().space().canonicalize(&mut y);
        if ctx.bowen_distance(c, &y).unwrap() < delta {
            return y;
        }
        scale /= 2.0;
    }
    c.clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pushforward_keeps_weights_and_is_linear(seed in 0u64..1000, n in 1usize..300, c in 0.05f64..0.95) {
        let s = sys("cat");
        let a = torus_sample(n, seed);
        let b = torus_sample(n + 3, seed + 1);
        let f = |p: &Point<f64>| s.evolve(3.0, p).unwrap();
        let pa = a.pushforward(f).unwrap();
        prop_assert_eq!(pa.weights(), a.weights());
        prop_assert_eq!(pa.total_mass(), a.total_mass());
        let mix = ParticleMeasure::combination(&[(c, &a), (1.0 - c, &b)]).unwrap();
        let lhs = mix.pushforward(f).unwrap();
        let rhs = ParticleMeasure::combination(&[(c, &pa), (1.0 - c, &b.pushforward(f).unwrap())]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bl_is_a_bounded_pseudometric(seed in 0u64..1000) {
        let cfg = ProbeConfig::default();
        let m: Vec<ParticleMeasure<f64>> = (0..3).map(|k| torus_sample(200, seed * 3 + k)).collect();
        let d = |i: usize, j: usize| bl_distance(&m[i], &m[j], &cfg).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        prop_assert!(d(0, 1) <= 2.0);
        prop_assert_eq!(d(0, 0), 0.0);
    }

    #[test]
    fn conditioning_matches_restricted_sum(seed in 0u64..1000, r in 0.1f64..0.6) {
        let m = torus_sample(500, seed);
        let g = TestFunction::cosine(0, 1.0, 1.0);
        let region = |p: &Point<f64>| p[1] < r;
        let mass = m.mass_where(region);
        prop_assume!(mass > 0.0);
        let lhs = m.condition(region).unwrap().integrate(&g) * mass;
        let rhs: f64 = m.iter().filter(|(p, _)| region(p)).map(|(p, w)| w * g.eval(p)).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn bowen_distance_is_a_metric(id in prop::sample::select(COVER_SYSTEMS.to_vec()), tau in 0u8..5, seed in 0u64..1000) {
        let s = sys(id);
        let tau = f64::from(tau);
        let ctx = BowenContext::new(s.clone(), tau, Some(0.05)).unwrap();
        let u = default_neighbourhood(id, &ZooParams::default()).unwrap();
        let p: ParticleMeasure<f64> = u.sample(3, seed).unwrap();
        let [x, y, z] = [&p.points()[0], &p.points()[1], &p.points()[2]];
        let d = |a: &Point<f64>, b: &Point<f64>| ctx.bowen_distance(a, b).unwrap();
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
        prop_assert!(d(x, y) >= s.distance(x, y));
        let ctx0 = BowenContext::new(s.clone(), 0.0, None).unwrap();
        prop_assert_eq!(ctx0.bowen_distance(x, y).unwrap(), s.distance(x, y));
    }

    #[test]
    fn cover_invariants_hold(
        id in prop::sample::select(COVER_SYSTEMS.to_vec()),
        tau in 0u8..4,
        delta in 0.02f64..0.15,
        n in 20usize..200,
        seed in 0u64..10_000,
    ) {
        let s = sys(id);
        let ctx = BowenContext::new(s.clone(), f64::from(tau), Some(delta)).unwrap();
        let a = s.attractor().unwrap();
        let cands = a.sample(n, seed).unwrap().points().to_vec();
        let cover = greedy_bisep(&ctx, &cands, delta).unwrap();
        let probes: Vec<Point<f64>> =
            cands.iter().enumerate().map(|(j, c)| near_point(&ctx, c, delta, split_seed(seed, j as u64))).collect();
        let report = cover.verify(&probes).unwrap();
        prop_assert!(report.ok(), "{id}: {report:?}");
        prop_assert!(report.min_separation >= 2.0 * delta);
        // cells are disjoint by construction and lie inside the 3 delta balls
        for y in &probes {
            let orbit = ctx.orbit(y).unwrap();
            let i = cover.assign_orbit(&orbit).unwrap();
            prop_assert!(ctx.orbit_distance(&cover.center_orbits()[i], &orbit) < 3.0 * delta);
        }
    }

    #[test]
    fn coarse_grain_is_a_probability_on_mu_particles(seed in 0u64..1000, tau in 0u8..4) {
        let s = sys("doubling_contract");
        let eps = 0.3;
        let delta = 0.99 * eps / 6.0;
        let ctx = BowenContext::new(s.clone(), f64::from(tau), Some(delta)).unwrap();
        let a = s.attractor().unwrap();
        // nu near the attractor circle y = 1
        let nu = DensitySpec::uniform(s.space().clone(), Support::boxed(vec![0.0, 0.99], vec![1.0, 1.01])).sample::<f64>(400, seed).unwrap();
        let mut cands: Vec<Point<f64>> = nu.points().iter().map(|p| a.project(p)).collect();
        cands.extend(a.sample(200, seed + 1).unwrap().points().iter().cloned());
        let cover = greedy_bisep(&ctx, &cands, delta).unwrap();
        let mu = a.sample(20_000, seed + 2).unwrap();
        let (p, report) = coarse_grain_detailed(&nu, &mu, &cover).unwrap();
        prop_assert!((p.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!((report.cell_mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.points().iter().all(|q| mu.points().contains(q)));
        prop_assert!(report.density_ratio.is_finite());
        let g = TestFunction::cone(s.space().clone(), Point(vec![0.3, 1.0]), 0.5, 1.0);
        for t in [0.0, ctx.half_time(), f64::from(tau)] {
            let (lhs, ok) = approx_error_check(&nu, &mu, &cover, &g, t).unwrap();
            prop_assert!(ok && lhs < eps, "t = {t}: {lhs}");
        }
    }

    #[test]
    fn birkhoff_measures_are_probabilities_on_the_orbit(seed in 0u64..1000, t_end in 2u32..60) {
        let s = sys("doubling_contract");
        let x = Point(vec![(seed as f64 * 0.618).fract(), 0.5 + (seed as f64 * 0.377).fract()]);
        let b = birkhoff_measure(&s, &x, f64::from(t_end), 0.0, 100, seed).unwrap();
        prop_assert!((b.total_mass() - 1.0).abs() < 1e-12);
        let orbit = s.trajectory(&x, &(0..t_end).map(f64::from).collect::<Vec<_>>()).unwrap();
        prop_assert!(b.points().iter().all(|p| orbit.contains(p)));
    }
}

#[test]
fn attracting_self_distance_is_zero() {
    let s = sys("doubling_contract");
    let u = default_neighbourhood("doubling_contract", &ZooParams::default()).unwrap();
    let nu: ParticleMeasure<f64> = u.sample(2000, 3).unwrap();
    let pushed = nu.try_pushforward(|p| s.evolve(4.0, p)).unwrap();
    let series = attracting_test_from(&s, &nu, &pushed, &[1.0, 4.0], &ProbeConfig::default()).unwrap();
    assert_eq!(series.values()[1], 0.0);
    assert!(series.values()[0] > 0.0);
}

#[test]
fn classical_correlation_at_zero_is_covariance() {
    let s = sys("cat");
    let mu = torus_sample(5000, 9);
    let g1 = TestFunction::cosine(0, 1.0, 1.0);
    let g2 = TestFunction::cosine(0, 1.0, 1.0);
    let c = classical_correlation(&s, &mu, &g1, &g2, &[0.0]).unwrap();
    let direct = mu.integrate_fn(|p| g1.eval(p) * g2.eval(p)) - mu.integrate(&g1) * mu.integrate(&g2);
    assert!((c.values()[0] - direct).abs() < 1e-15);
}

#[test]
fn counterexample_fiber_and_clock_are_monotone() {
    for y0 in [0.01, 0.2, 0.5] {
        let p = CounterexampleParams::<f64>::with_default_base(y0).unwrap();
        let mut t = 1e-3;
        let (mut phi, mut psi) = (p.phi(0.0).unwrap(), p.psi(0.0).unwrap());
        while t <= 1e8 {
            let (a, b) = (p.phi(t).unwrap(), p.psi(t).unwrap());
            assert!(a < phi && b > psi, "y0 = {y0}, t = {t}");
            (phi, psi) = (a, b);
            t *= 2.0;
        }
        // psi grows like loglog t: about 1.7 at 1e8 for the smallest y0
        assert!(phi < 1e-8 && psi > 1.5);
    }
}

#[test]
fn b2_prime_vanishes_monotonically_at_zero() {
    let mut prev = 0.0;
    for k in (1..=8).rev() {
        let v = b2_prime(10f64.powi(-k)).unwrap().abs();
        assert!(v >= prev * 0.99, "|y| = 1e-{k}");
        prev = v;
    }
    assert!(b2_prime(1e-8f64).unwrap().abs() < 0.01);
}

#[test]
fn continuous_systems_use_fine_bowen_grids() {
    let s = sys("planar_rotation");
    assert_eq!(s.time_kind(), TimeKind::Continuous);
    let ctx = BowenContext::new(s, 1.0, Some(0.05)).unwrap();
    assert!(ctx.grid().windows(2).all(|w| w[1] - w[0] <= 0.05 * 0.05 / 2.0 + 1e-15));
}
