use std::f64::consts::{FRAC_PI_4, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eip_core::circuit::{simulate_pixel_events, CircuitConfig, STEPS_PER_PERIOD};
use eip_core::eip::{find_peaks, reconstruct_cycle};
use eip_core::event::PixelEvent;
use eip_core::masks::mask_collapsed;
use eip_core::solver::{
    cost, eventps_baseline, ideal_eip, solve_normal, solve_normal_traced, CostFunction,
    SampleGeometry,
};
use eip_core::{
    Error, LightTrajectory, PixelThresholds, Polarity, Profile, SolverConfig, SurfaceNormal,
    TemporalMask, Vec3,
};

const SAMPLES: usize = 256;

fn traj() -> LightTrajectory {
    LightTrajectory::circular(FRAC_PI_4, 1.0, 0.0).unwrap()
}

fn ideal_profile(n: &SurfaceNormal, traj: &LightTrajectory, ratio: f64) -> Profile {
    Profile::from_fn(traj.period(), SAMPLES, |t| {
        ideal_eip(n, traj, ratio, t).unwrap()
    })
    .unwrap()
}

/// Events of a lone pixel with radiance `albedo·max(nᵀl, 0) + offset`.
fn pixel_events(
    n: &SurfaceNormal,
    albedo: f64,
    offset: f64,
    h: f64,
    cycles: usize,
) -> Vec<PixelEvent> {
    let traj = traj();
    let mut circuit = CircuitConfig::ideal(PixelThresholds::uniform(1, 1, h, -h).unwrap());
    circuit.logamp_floor = 1e-12;
    simulate_pixel_events(
        |t| albedo * n.vector().dot(&traj.direction(t)).max(0.0) + offset,
        &circuit,
        h,
        -h,
        0.0,
        cycles as f64,
        1.0 / STEPS_PER_PERIOD as f64,
        &mut circuit.pixel_rng(0),
    )
    .unwrap()
}

fn simulated_profile(n: &SurfaceNormal, albedo: f64, offset: f64) -> Profile {
    simulated_profile_at(n, albedo, offset, 0.05)
}

fn simulated_profile_at(n: &SurfaceNormal, albedo: f64, offset: f64, h: f64) -> Profile {
    reconstruct_cycle(
        &pixel_events(n, albedo, offset, h, 3),
        h,
        -h,
        1.0,
        1.0,
        SAMPLES,
    )
    .unwrap()
}

#[test]
fn ideal_quarter_period_matches_log_derivative() {
    let traj = traj();
    let n = SurfaceNormal::from_angles(FRAC_PI_4, 0.0);
    let shading = |t: f64| n.vector().dot(&traj.direction(t));
    let step = 1e-7;
    let fd = (shading(0.25 + step).ln() - shading(0.25 - step).ln()) / (2.0 * step);
    let p = ideal_eip(&n, &traj, 0.0, 0.25).unwrap();
    assert!((p - fd).abs() < 1e-5, "{p} vs {fd}");
    assert!((p + 2.0 * PI).abs() < 1e-9);
    assert!(ideal_eip(&n, &traj, 0.0, 0.0).unwrap().abs() < 1e-12);
}

#[test]
fn cost_vanishes_on_its_own_ideal() {
    let traj = traj();
    let n = SurfaceNormal::from_angles(0.6, 2.0);
    let p = ideal_profile(&n, &traj, 0.1);
    let c = cost(&n, &p, &TemporalMask::full(1.0), &traj, 0.1).unwrap();
    assert!(c < 1e-24, "{c}");
}

#[test]
fn constant_offset_costs_its_square() {
    let traj = traj();
    let n = SurfaceNormal::from_angles(0.6, 2.0);
    let p = ideal_profile(&n, &traj, 0.1);
    let shifted = Profile::new(
        1.0,
        p.values().iter().map(|v| v + 0.2).collect(),
        p.valid().to_vec(),
    )
    .unwrap();
    let c = cost(&n, &shifted, &TemporalMask::full(1.0), &traj, 0.1).unwrap();
    assert!((c - 0.04).abs() < 1e-12, "{c}");
}

#[test]
fn flat_candidate_costs_mean_square_of_profile() {
    let traj = traj();
    let truth = SurfaceNormal::from_angles(FRAC_PI_4, 0.0);
    let p = ideal_profile(&truth, &traj, 0.1);
    let mask = TemporalMask::from_arcs(1.0, [(0.1, 0.35), (0.6, 0.9)]).unwrap();
    let inside = mask.sample(SAMPLES);
    let included: Vec<f64> = (0..SAMPLES)
        .filter(|&i| inside[i])
        .map(|i| p.value(i))
        .collect();
    let expected = included.iter().map(|v| v * v).sum::<f64>() / included.len() as f64;
    let c = cost(&SurfaceNormal::UP, &p, &mask, &traj, 0.1).unwrap();
    assert!(
        (c - expected).abs() < 1e-12 * expected.max(1.0),
        "{c} vs {expected}"
    );
}

#[test]
fn empty_support_is_an_error() {
    let traj = traj();
    let p = Profile::invalid(1.0, SAMPLES).unwrap();
    let r = cost(&SurfaceNormal::UP, &p, &TemporalMask::full(1.0), &traj, 0.1);
    assert!(matches!(r, Err(Error::EmptySupport)));
    let r = solve_normal(
        &p,
        &TemporalMask::full(1.0),
        &traj,
        &SolverConfig::default(),
    );
    assert!(matches!(r, Err(Error::Unsolvable)));
}

#[test]
fn zero_profile_recovers_view_direction() {
    let p = Profile::from_fn(1.0, SAMPLES, |_| 0.0).unwrap();
    let r = solve_normal(
        &p,
        &TemporalMask::full(1.0),
        &traj(),
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(r.normal.angle_to(&SurfaceNormal::UP) < 1e-9);
    assert!(r.cost < 1e-24);
}

#[test]
fn simulated_pixel_round_trip() {
    let truth = SurfaceNormal::from_angles(40f64.to_radians(), 123f64.to_radians());
    let cfg = SolverConfig::default();
    // full support keeps the extrema, where secant rates flatten the profile;
    // a finer threshold samples them densely enough
    let fine = simulated_profile_at(&truth, 1.0, 0.1, 0.025);
    let r = solve_normal(&fine, &TemporalMask::full(1.0), &traj(), &cfg).unwrap();
    let err = r.normal.angle_to(&truth).to_degrees();
    assert!(err < 0.5, "full support error {err}");

    let p = simulated_profile(&truth, 1.0, 0.1);
    let (top, bottom) = find_peaks(&p).unwrap();
    let mask = mask_collapsed(top, bottom, 1.0).unwrap();
    let r = solve_normal(&p, &mask, &traj(), &cfg).unwrap();
    let err = r.normal.angle_to(&truth).to_degrees();
    assert!(err < 1.0, "collapsed mask error {err}");
}

#[test]
fn albedo_never_enters_the_fit() {
    let cfg = SolverConfig {
        offset_ratio: 0.0,
        ..SolverConfig::default()
    };
    for (zen, az) in [(20.0, 10.0), (35.0, 200.0), (12.0, 300.0)] {
        let truth = SurfaceNormal::from_angles(f64::to_radians(zen), f64::to_radians(az));
        let fits: Vec<SurfaceNormal> = [0.2, 0.9]
            .iter()
            .map(|&rho| {
                let p = simulated_profile(&truth, rho, 0.0);
                solve_normal(&p, &TemporalMask::full(1.0), &traj(), &cfg)
                    .unwrap()
                    .normal
            })
            .collect();
        let gap = fits[0].angle_to(&fits[1]).to_degrees();
        assert!(gap < 0.1, "normal ({zen}, {az}) differs by {gap} deg");
    }
}

#[test]
fn baseline_minimizes_stacked_residual() {
    let traj = traj();
    let truth = SurfaceNormal::from_angles(0.5, 1.3);
    let h = 0.05;
    let events = pixel_events(&truth, 1.0, 0.0, h, 2);
    let n = eventps_baseline(&events, h, -h, &traj).unwrap();
    assert!(n.vector().z > 0.0);
    let rows: Vec<Vec3> = events
        .windows(2)
        .filter(|w| w[1].t != w[0].t)
        .map(|w| {
            let step = match w[1].polarity {
                Polarity::Positive => h,
                Polarity::Negative => -h,
            };
            traj.direction(w[1].t) - step.exp() * traj.direction(w[0].t)
        })
        .collect();
    let residual = |u: &Vec3| rows.iter().map(|r| r.dot(u).powi(2)).sum::<f64>().sqrt();
    let best = residual(n.vector());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let u = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let Some(u) = u.try_normalize(1e-6) else {
            continue;
        };
        assert!(best <= residual(&u) + 1e-12, "{best} > {}", residual(&u));
    }
    assert!(n.angle_to(&truth).to_degrees() < 0.01);
}

fn perturbed_profile(n: &SurfaceNormal, wobble: f64) -> Profile {
    let traj = traj();
    Profile::from_fn(1.0, SAMPLES, |t| {
        ideal_eip(n, &traj, 0.1, t).unwrap() + wobble * (7.0 * std::f64::consts::TAU * t).sin()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Scaling the ideal profile by c is a time compression by c.
    #[test]
    fn argmin_invariant_to_joint_scaling(
        zen in 0.1f64..1.3,
        az in 0.0f64..std::f64::consts::TAU,
        scale in 0.5f64..4.0,
        wobble in 0.0f64..0.3,
    ) {
        let n = SurfaceNormal::from_angles(zen, az);
        let p = perturbed_profile(&n, wobble);
        let cfg = SolverConfig::default();
        let base = solve_normal(&p, &TemporalMask::full(1.0), &traj(), &cfg).unwrap();
        let fast = LightTrajectory::circular(FRAC_PI_4, 1.0 / scale, 0.0).unwrap();
        let scaled = Profile::new(
            1.0 / scale,
            p.values().iter().map(|v| v * scale).collect(),
            p.valid().to_vec(),
        ).unwrap();
        let r = solve_normal(&scaled, &TemporalMask::full(1.0 / scale), &fast, &cfg).unwrap();
        prop_assert!(r.normal.angle_to(&base.normal).to_degrees() < 1e-3);
        prop_assert!((r.cost - scale * scale * base.cost).abs() <= 1e-6 * (scale * scale * base.cost).max(1e-12));
    }

    #[test]
    fn refinement_strictly_decreases_cost(
        zen in 0.0f64..1.4,
        az in 0.0f64..std::f64::consts::TAU,
        wobble in 0.0f64..0.5,
    ) {
        let n = SurfaceNormal::from_angles(zen, az);
        let p = perturbed_profile(&n, wobble);
        let (r, trace) = solve_normal_traced(&p, &TemporalMask::full(1.0), &traj(), &SolverConfig::default()).unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
        if let Some(last) = trace.last() {
            prop_assert_eq!(*last, r.cost);
        }
        prop_assert!(r.cost >= 0.0);
    }

    #[test]
    fn cost_scales_by_square_of_time_compression(
        zen in 0.1f64..1.3,
        az in 0.0f64..std::f64::consts::TAU,
        scale in 0.5f64..4.0,
    ) {
        let truth = SurfaceNormal::from_angles(0.7, 1.0);
        let p = perturbed_profile(&truth, 0.2);
        let geometry = SampleGeometry::new(&traj(), SAMPLES);
        let mask = TemporalMask::full(1.0);
        let f = CostFunction::new(&geometry, &p, &mask, 0.1).unwrap();
        let fast = LightTrajectory::circular(FRAC_PI_4, 1.0 / scale, 0.0).unwrap();
        let fast_geometry = SampleGeometry::new(&fast, SAMPLES);
        let scaled = Profile::new(1.0 / scale, p.values().iter().map(|v| v * scale).collect(), p.valid().to_vec()).unwrap();
        let fast_mask = TemporalMask::full(1.0 / scale);
        let g = CostFunction::new(&fast_geometry, &scaled, &fast_mask, 0.1).unwrap();
        let (a, _) = f.eval_angles(zen, az).unwrap();
        let (b, _) = g.eval_angles(zen, az).unwrap();
        prop_assert!((b - scale * scale * a).abs() <= 1e-9 * b.max(1e-12));
    }
}
