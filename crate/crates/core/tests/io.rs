use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eip_core::eval::{evaluate_mae, foreground_of};
use eip_core::event::Event;
use eip_core::io::{
    read_events, read_events_binary, read_events_text, read_normal_pfm, read_scalar_pfm,
    write_events_binary, write_events_text, write_normal_pfm, write_scalar_pfm,
};
use eip_core::scene::{make_sphere_scene, ScenePreset};
use eip_core::solver::apply_azimuth_offset;
use eip_core::{EventStream, Image, Polarity};

fn random_stream(seed: u64, count: usize, micros: bool) -> EventStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = (0..count)
        .map(|_| {
            let t = if micros {
                rng.gen_range(0..4_000_000u64) as f64 / 1e6
            } else {
                rng.gen_range(0.0..4.0)
            };
            let p = if rng.gen_bool(0.5) {
                Polarity::Positive
            } else {
                Polarity::Negative
            };
            Event::new(rng.gen_range(0..640), rng.gen_range(0..480), t, p)
        })
        .collect();
    EventStream::from_unsorted(640, 480, events, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap()
}

#[test]
fn hundred_thousand_events_round_trip_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.evt");
    let stream = random_stream(1, 100_000, false);
    write_events_binary(&path, &stream).unwrap();
    let back = read_events_binary(&path).unwrap();
    assert_eq!(back.width(), 640);
    assert_eq!(back.height(), 480);
    assert_eq!(back.cycle_syncs(), stream.cycle_syncs());
    assert_eq!(back.len(), stream.len());
    for (a, b) in stream.events().iter().zip(back.events()) {
        assert_eq!((a.x, a.y, a.polarity), (b.x, b.y, b.polarity));
        assert!((a.t - b.t).abs() <= 0.5e-9, "{} vs {}", a.t, b.t);
    }
}

#[test]
fn extension_selects_format() {
    let dir = tempfile::tempdir().unwrap();
    let stream = random_stream(2, 500, true);
    let text = dir.path().join("a.txt");
    let bin = dir.path().join("a.bin");
    write_events_text(&text, &stream).unwrap();
    write_events_binary(&bin, &stream).unwrap();
    assert!(std::fs::read_to_string(&text)
        .unwrap()
        .starts_with("x,y,t_us,p\n"));
    assert_eq!(&std::fs::read(&bin).unwrap()[..4], b"EVT1");
    let a = read_events(&text, Some((640, 480))).unwrap();
    let b = read_events(&bin, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn azimuth_offset_error_matches_spherical_oracle() {
    let truth = make_sphere_scene(32, ScenePreset::Diffuse)
        .unwrap()
        .normal_map();
    let delta = 0.3f64;
    let rotated = apply_azimuth_offset(&truth, delta);
    let report = evaluate_mae(&rotated, &truth, &foreground_of(&truth)).unwrap();
    let mut sum = 0.0;
    for (n, e) in truth.data().iter().zip(report.error_map.data()) {
        let Some(n) = n else { continue };
        let (c, s) = (n.zenith().cos(), n.zenith().sin());
        let oracle = (c * c + s * s * delta.cos())
            .clamp(-1.0, 1.0)
            .acos()
            .to_degrees();
        assert!((e - oracle).abs() < 1e-5, "{e} vs {oracle}");
        sum += oracle;
    }
    assert!((report.mae_deg - sum / report.evaluated as f64).abs() < 1e-6);
    assert_eq!(report.sentinel, 0);
}

#[test]
fn normal_and_scalar_maps_survive_pfm() {
    let dir = tempfile::tempdir().unwrap();
    let normals = make_sphere_scene(20, ScenePreset::Diffuse)
        .unwrap()
        .normal_map();
    let p = dir.path().join("n.pfm");
    write_normal_pfm(&p, &normals).unwrap();
    let back = read_normal_pfm(&p).unwrap();
    for (a, b) in normals.data().iter().zip(back.data()) {
        match (a, b) {
            (Some(a), Some(b)) => assert!(a.angle_to(b) < 1e-6),
            (None, None) => {}
            other => panic!("{other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn text_and_binary_agree_at_microsecond_resolution(seed in any::<u64>(), count in 0usize..400) {
        let dir = tempfile::tempdir().unwrap();
        let stream = random_stream(seed, count, true);
        let (text, bin) = (dir.path().join("e.txt"), dir.path().join("e.evt"));
        write_events_text(&text, &stream).unwrap();
        write_events_binary(&bin, &stream).unwrap();
        let a = read_events_text(&text, Some((640, 480))).unwrap();
        let b = read_events_binary(&bin).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(&a, &stream);
    }

    #[test]
    fn scalar_pfm_round_trip_is_exact_in_f32(
        w in 1usize..9,
        h in 1usize..9,
        seed in any::<u64>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..w * h).map(|_| f64::from(rng.gen_range(-1e3f32..1e3))).collect();
        let map = Image::from_vec(w, h, data).unwrap();
        let p = dir.path().join("s.pfm");
        write_scalar_pfm(&p, &map).unwrap();
        prop_assert_eq!(read_scalar_pfm(&p).unwrap(), map);
    }
}
