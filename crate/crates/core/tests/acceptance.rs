//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use ambikit::binaural::{binaural_render, synthetic_hrir_set, BinauralConfig, HrirEntry, HrirSet};
use ambikit::decode::{
    analyze_decoder, apply_decoder, build_decoder, inside_layout, square_grid, DecoderMethod, Geometry,
    SpeakerLayout, Weighting,
};
use ambikit::encode::{encode_source, render_scene, tetra_a_to_b, SceneDescription, Source, TetraGeometry};
use ambikit::io::{
    convert_convention, parse_caf, parse_wav, encode_caf, encode_wav, write_audio, AudioData, FormatMeta,
    SampleFormat,
};
use ambikit::sh::{
    channel_count, mode_from_acn, quadrature_grid, sh_synthesis, sh_vector, Direction, ModeIndex, Normalization,
};
use ambikit::transform::{
    compress, compressor_gain, mirror, rotate, CompressorParams, Detector, MirrorPlane, RotationSpec,
};
use ambikit::{AmbiError, AmbisonicBuffer, Convention};
use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn noise(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_direction(rng: &mut StdRng) -> Direction {
    let z: f64 = rng.random_range(-1.0..1.0);
    Direction::new(rng.random_range(-PI..PI), z.asin())
}

fn max_abs_diff(a: &AmbisonicBuffer, b: &AmbisonicBuffer) -> f64 {
    a.channels()
        .iter()
        .flatten()
        .zip(b.channels().iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn channel_table() -> Check {
    let counts: Vec<usize> = [0, 1, 7].iter().map(|n| channel_count(*n)).collect();
    ensure(counts == vec![1, 4, 64], format!("channel counts {counts:?}"))?;
    let table = [(0, 0), (1, -1), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)];
    for (k, (n, m)) in table.iter().enumerate() {
        let mode = mode_from_acn(k);
        ensure(mode.n() == *n && mode.m() == *m, format!("ACN {k} -> {mode}"))?;
        ensure(ModeIndex::new(*n, *m).unwrap().acn() == k, format!("({n},{m}) -> ACN mismatch"))?;
    }
    Ok("1/4/64 channels, 9 table entries".into())
}

fn scene_nulls() -> Check {
    let sr = 48000;
    let frames = 5 * sr as usize;
    let mut rng = StdRng::seed_from_u64(2);
    let placements = [("sax", 0.0), ("guitar", 45.0), ("bass", -45.0)];
    let signals: Vec<Vec<f64>> = placements.iter().map(|_| noise(&mut rng, frames)).collect();
    let sources = placements
        .iter()
        .zip(&signals)
        .map(|((_, az), s)| Source::new(s.clone(), sr, Direction::from_degrees(*az, 0.0), 1.0).unwrap())
        .collect();
    let scene = render_scene(&SceneDescription {
        order: 3,
        sample_rate: sr,
        sources,
    })
    .map_err(|e| e.to_string())?;
    let null = scene.channel(2).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(null <= 1e-12, format!("ACN 2 peak {null:e}"))?;

    // Oracle for (1,-1): sin(az) cos(el).
    let weight = |az: f64| az.to_radians().sin();
    ensure(weight(0.0) == 0.0, "oracle weight for the front source")?;
    let enc: Vec<f64> = placements
        .iter()
        .map(|(_, az)| encode_source(&[1.0], sr, Direction::from_degrees(*az, 0.0), 1).channel(1)[0])
        .collect();
    ensure(enc[0] == 0.0, format!("sax projection {}", enc[0]))?;
    ensure(enc[1] > 0.0 && enc[2] < 0.0, format!("guitar {} / bass {}", enc[1], enc[2]))?;
    for (e, (_, az)) in enc.iter().zip(&placements) {
        ensure((e - weight(*az)).abs() < 1e-15, "encoder differs from the (1,-1) formula")?;
    }
    let mut err = 0.0f64;
    for ((got, g), b) in scene.channel(1).iter().zip(&signals[1]).zip(&signals[2]) {
        err = err.max((got - (enc[1] * g + enc[2] * b)).abs());
    }
    ensure(err <= 1e-12, format!("ACN 1 deviates from guitar/bass sum by {err:e}"))?;
    Ok(format!("ACN 2 max {null:e}; ACN 1 weights 0 / {:+.4} / {:+.4}", enc[1], enc[2]))
}

fn rotation_lossless() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for order in 1..=7 {
        let b = encode_source(&noise(&mut rng, 64), 48000, random_direction(&mut rng), order);
        let peak = b.channels().iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..20 {
            let r = RotationSpec::new(
                rng.random_range(-PI..PI),
                rng.random_range(-FRAC_PI_2..FRAC_PI_2),
                rng.random_range(-PI..PI),
            );
            let there = rotate(&b, &r).map_err(|e| e.to_string())?;
            let back = ambikit::transform::rotate_matrix(&there, &r.inverse_matrix()).map_err(|e| e.to_string())?;
            worst = worst.max(max_abs_diff(&back, &b) / peak);
            let yaw = RotationSpec::new(r.yaw, 0.0, 0.0);
            let unyaw = RotationSpec::new(-r.yaw, 0.0, 0.0);
            let back = rotate(&rotate(&b, &yaw).unwrap(), &unyaw).unwrap();
            worst = worst.max(max_abs_diff(&back, &b) / peak);
        }
    }
    ensure(worst <= 1e-10, format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn rotate_encode_commutation() -> Check {
    let mut rng = StdRng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let order = 1 + i % 7;
        let d = random_direction(&mut rng);
        let r = RotationSpec::new(
            rng.random_range(-PI..PI),
            rng.random_range(-FRAC_PI_2..FRAC_PI_2),
            rng.random_range(-PI..PI),
        );
        let s = noise(&mut rng, 16);
        let rotated = rotate(&encode_source(&s, 48000, d, order), &r).map_err(|e| e.to_string())?;
        let moved = Direction::from_vector(&(r.matrix() * d.unit_vector()));
        worst = worst.max(max_abs_diff(&rotated, &encode_source(&s, 48000, moved, order)));
    }
    ensure(worst <= 1e-10, format!("max abs error {worst:e}"))?;
    Ok(format!("max abs error {worst:.2e}"))
}

fn mirror_oracles() -> Check {
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let reflect = |plane: MirrorPlane, v: Vector3<f64>| match plane {
        MirrorPlane::LeftRight => Vector3::new(v.x, -v.y, v.z),
        MirrorPlane::FrontBack => Vector3::new(-v.x, v.y, v.z),
        MirrorPlane::TopBottom => Vector3::new(v.x, v.y, -v.z),
    };
    for plane in [MirrorPlane::LeftRight, MirrorPlane::FrontBack, MirrorPlane::TopBottom] {
        for _ in 0..50 {
            let d = random_direction(&mut rng);
            let s = noise(&mut rng, 8);
            let b = encode_source(&s, 48000, d, 7);
            let m = mirror(&b, plane).map_err(|e| e.to_string())?;
            let oracle = encode_source(&s, 48000, Direction::from_vector(&reflect(plane, d.unit_vector())), 7);
            worst = worst.max(max_abs_diff(&m, &oracle));
            ensure(mirror(&m, plane).unwrap() == b, format!("double {plane} mirror not bit-identical"))?;
        }
    }
    ensure(worst <= 1e-12, format!("max abs error {worst:e}"))?;
    Ok(format!("max abs error {worst:.2e}, double mirror bit-identical"))
}

fn gram_matrix() -> Check {
    let order = 7;
    let grid = quadrature_grid(2 * order);
    let count = channel_count(order);
    let mut gram = vec![vec![0.0; count]; count];
    for (d, w) in grid.directions().iter().zip(grid.weights()) {
        let y = sh_vector(*d, order, Normalization::N3d).map_err(|e| e.to_string())?;
        for i in 0..count {
            for j in 0..count {
                gram[i][j] += w * y[i] * y[j];
            }
        }
    }
    let mut worst = 0.0f64;
    for (i, row) in gram.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            let expected = if i == j { 4.0 * PI } else { 0.0 };
            worst = worst.max((g - expected).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("order 7, max deviation from 4πI {worst:.2e}"))
}

fn beam_shapes() -> Check {
    let sweep: Vec<Direction> = (0..720).map(|k| Direction::from_degrees(k as f64 * 0.5 - 180.0, 0.0)).collect();
    let peak_of = |values: &[f64]| {
        let (k, _) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        sweep[k].azimuth().to_degrees()
    };
    let cardioid = sh_synthesis(&[1.0, 1.0, 0.0, 0.0], &sweep).map_err(|e| e.to_string())?;
    let peak = peak_of(&cardioid);
    ensure((peak - 90.0).abs() <= 1.0, format!("cardioid peak at {peak}°"))?;
    let back = sh_synthesis(&[1.0, 1.0, 0.0, 0.0], &[Direction::from_degrees(-90.0, 0.0)]).unwrap()[0];
    ensure(back.abs() <= 1e-12, format!("cardioid rear value {back:e}"))?;

    let target = Direction::from_degrees(90.0, 0.0);
    let y = sh_vector(target, 3, Normalization::Sn3d).unwrap();
    let coeffs: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(k, v)| (2 * mode_from_acn(k).n() + 1) as f64 * v)
        .collect();
    let beam = sh_synthesis(&coeffs, &sweep).unwrap();
    let peak3 = peak_of(&beam);
    ensure((peak3 - 90.0).abs() <= 1.0, format!("order-3 beam peak at {peak3}°"))?;
    let ends = sh_synthesis(&coeffs, &[target, Direction::from_degrees(-90.0, 0.0)]).unwrap();
    let ratio = 20.0 * (ends[0].abs() / ends[1].abs()).log10();
    ensure(ratio > 10.0, format!("front-to-back {ratio:.1} dB"))?;
    Ok(format!("cardioid peak {peak}°, order-3 peak {peak3}°, front/back {ratio:.1} dB"))
}

fn sweet_area() -> Check {
    let layout = SpeakerLayout::uniform_circle(8, 0.0).map_err(|e| e.to_string())?;
    let positions: Vec<Vector3<f64>> = square_grid(40, layout.array_radius())
        .into_iter()
        .filter(|p| inside_layout(&layout, p))
        .collect();
    let sources: Vec<Direction> = (0..180).map(|k| Direction::from_degrees(2.0 * k as f64, 0.0)).collect();
    let mut radii = Vec::new();
    for order in 1..=3 {
        let dec = build_decoder(&layout, order, DecoderMethod::Projection, Weighting::MaxRe).map_err(|e| e.to_string())?;
        let report = analyze_decoder(&dec, &layout, &sources, &positions).map_err(|e| e.to_string())?;
        radii.push(report.sweet_area_radius);
    }
    let summary = format!("radii {:.3} / {:.3} / {:.3}", radii[0], radii[1], radii[2]);
    ensure((radii[0] - 0.5).abs() <= 0.15, format!("order-1 {summary}"))?;
    ensure(radii[2] >= 0.8, format!("order-3 {summary}"))?;
    ensure(radii.windows(2).all(|w| w[1] >= w[0]), format!("not monotone: {summary}"))?;
    Ok(summary)
}

fn tetrahedral() -> Check {
    let mut rng = StdRng::seed_from_u64(9);
    let geom = TetraGeometry::new(0.5).map_err(|e| e.to_string())?;
    let axes = TetraGeometry::axes();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = random_direction(&mut rng);
        let s = noise(&mut rng, 32);
        let u = d.unit_vector();
        let capsules: Vec<Vec<f64>> = axes
            .iter()
            .map(|a| {
                let pattern = 0.5 + 0.5 * a.dot(&u);
                s.iter().map(|v| v * pattern).collect()
            })
            .collect();
        let b = tetra_a_to_b(&AudioData::new(48000, capsules).unwrap(), geom).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs_diff(&b, &encode_source(&s, 48000, d, 1)));
    }
    ensure(worst <= 1e-10, format!("max abs error {worst:e}"))?;
    Ok(format!("max abs error {worst:.2e}"))
}

fn truncation_rule() -> Check {
    let mut rng = StdRng::seed_from_u64(10);
    let b = encode_source(&noise(&mut rng, 256), 48000, random_direction(&mut rng), 7);
    let sphere = SpeakerLayout::from_directions(quadrature_grid(8).directions(), Geometry::Spherical3d).unwrap();
    let circle = SpeakerLayout::uniform_circle(8, 0.0).unwrap();
    let mut worst = 0.0f64;
    for (layout, method) in [
        (&sphere, DecoderMethod::Projection),
        (&sphere, DecoderMethod::ModeMatching),
        (&sphere, DecoderMethod::AllRad),
        (&circle, DecoderMethod::ModeMatching),
    ] {
        let dec = build_decoder(layout, 3, method, Weighting::MaxRe).map_err(|e| e.to_string())?;
        let full = apply_decoder(&b, &dec).map_err(|e| e.to_string())?;
        let trunc = apply_decoder(&b.truncated(3).unwrap(), &dec).map_err(|e| e.to_string())?;
        for (x, y) in full.channels.iter().flatten().zip(trunc.channels.iter().flatten()) {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max abs difference {worst:e}"))?;
    Ok(format!("max abs difference {worst:.2e}"))
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn binaural_properties() -> Check {
    let mut rng = StdRng::seed_from_u64(11);
    let deltas = HrirSet::new(
        48000,
        quadrature_grid(4)
            .directions()
            .iter()
            .map(|d| HrirEntry {
                direction: *d,
                left: vec![1.0],
                right: vec![1.0],
            })
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let omni = encode_source(&noise(&mut rng, 1000), 48000, random_direction(&mut rng), 0);
    let cfg = BinauralConfig::default();
    let out = binaural_render(&omni, &deltas, &cfg).map_err(|e| e.to_string())?;
    ensure(out.channels[0] == out.channels[1], "order-0 ears differ")?;

    let fixture = synthetic_hrir_set(48000);
    let left = encode_source(&noise(&mut rng, 4800), 48000, Direction::new(FRAC_PI_2, 0.0), 3);
    let out = binaural_render(&left, &fixture, &cfg).map_err(|e| e.to_string())?;
    let (l, r) = (rms(&out.channels[0]), rms(&out.channels[1]));
    ensure(l > r, format!("left {l} <= right {r}"))?;

    let scene = encode_source(&noise(&mut rng, 2000), 48000, random_direction(&mut rng), 3);
    let a = binaural_render(&scene, &fixture, &cfg).map_err(|e| e.to_string())?;
    let m = binaural_render(&mirror(&scene, MirrorPlane::LeftRight).unwrap(), &fixture, &cfg).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (x, y) in a.channels[0].iter().zip(&m.channels[1]).chain(a.channels[1].iter().zip(&m.channels[0])) {
        worst = worst.max((x - y).abs());
    }
    ensure(worst <= 1e-10, format!("mirrored ears differ by {worst:e}"))?;
    Ok(format!("L=R exact; hard-left ILD {:.1} dB; swap error {worst:.2e}", 20.0 * (l / r).log10()))
}

fn formats() -> Check {
    let mut rng = StdRng::seed_from_u64(12);
    let channels: Vec<Vec<f64>> = (0..9)
        .map(|_| noise(&mut rng, 200).into_iter().map(|v| v as f32 as f64).collect())
        .collect();
    let audio = AudioData::new(44100, channels).unwrap();
    let wav = encode_wav(&audio, SampleFormat::Float32, false).map_err(|e| e.to_string())?;
    let (back, _) = parse_wav(&wav).map_err(|e| e.to_string())?;
    ensure(back == audio, "WAV float32 round trip not bit-exact")?;
    let caf = encode_caf(&audio, SampleFormat::Float32);
    let back = parse_caf(&caf).map_err(|e| e.to_string())?;
    ensure(back == audio, "CAF float32 round trip not bit-exact")?;

    let b = encode_source(&noise(&mut rng, 100), 48000, random_direction(&mut rng), 3);
    let fuma = convert_convention(&b, Convention::FUMA).map_err(|e| e.to_string())?;
    let again = convert_convention(&fuma, Convention::ACN_SN3D).map_err(|e| e.to_string())?;
    let err = max_abs_diff(&again, &b);
    ensure(err <= 1e-12, format!("ACN<->FuMa error {err:e}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("o4.amb");
    let b4 = encode_source(&[0.1, 0.2], 48000, Direction::new(0.0, 0.0), 4);
    let meta = FormatMeta::for_path(&path, 4).map_err(|e| e.to_string())?;
    match write_audio(&b4, &path, &meta) {
        Err(AmbiError::UnsupportedFormat(_)) => {}
        other => return Err(format!("order-4 AMB write gave {other:?}")),
    }
    Ok(format!("WAV/CAF bit-exact, ACN<->FuMa {err:.2e}, AMB order 4 refused"))
}

fn compressor() -> Check {
    let mut rng = StdRng::seed_from_u64(13);
    let b = encode_source(&noise(&mut rng, 24000), 48000, random_direction(&mut rng), 1);
    let unity = CompressorParams::new(-30.0, 1.0, 5.0, 50.0, 0.0, Detector::Peak).unwrap();
    ensure(compress(&b, &unity).map_err(|e| e.to_string())? == b, "ratio 1 not bit-identical")?;

    let sr = 48000usize;
    let amp = 10f64.powf(-8.0 / 20.0);
    let sine: Vec<f64> = (0..sr)
        .map(|i| amp * (2.0 * PI * 1000.0 * i as f64 / sr as f64).sin())
        .collect();
    let mono = AmbisonicBuffer::canonical(sr as u32, vec![sine]).unwrap();
    let params = CompressorParams::new(-20.0, 4.0, 5.0, 200.0, 0.0, Detector::Peak).unwrap();
    let out = compress(&mono, &params).map_err(|e| e.to_string())?;
    let peak = out.channel(0)[sr / 2..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let level = 20.0 * peak.log10();
    // Static curve oracle: -8 + (-20 - -8) * (1 - 1/4) = -17.
    let expected = -8.0 + (-20.0 - -8.0) * (1.0 - 1.0 / 4.0);
    ensure((level - expected).abs() <= 0.1, format!("steady state {level:.3} dBFS"))?;

    let loud = encode_source(&noise(&mut rng, 24000), 48000, random_direction(&mut rng), 1);
    let out = compress(&loud, &params).map_err(|e| e.to_string())?;
    let gain = compressor_gain(&loud, &params).map_err(|e| e.to_string())?;
    for k in 0..loud.channel_count() {
        for ((o, x), g) in out.channel(k).iter().zip(loud.channel(k)).zip(&gain) {
            ensure(*o == x * g, "channels received different gains")?;
        }
    }
    let mut worst = 0.0f64;
    for k in 1..loud.channel_count() {
        for t in 0..loud.frames() {
            if loud.channel(0)[t] != 0.0 {
                let before = loud.channel(k)[t] / loud.channel(0)[t];
                let after = out.channel(k)[t] / out.channel(0)[t];
                worst = worst.max(((after - before) / before).abs());
            }
        }
    }
    ensure(worst <= 4.0 * f64::EPSILON, format!("channel ratio drift {worst:e}"))?;
    Ok(format!("steady state {level:.3} dBFS; identical per-sample gain; ratio drift {worst:.1e}"))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("channel count and ACN table", Duration::from_secs(1), channel_table),
        ("three-instrument scene nulls", Duration::from_secs(2), scene_nulls),
        ("rotation losslessness", Duration::from_secs(5), rotation_lossless),
        ("rotate/encode commutation", Duration::from_secs(10), rotate_encode_commutation),
        ("mirror oracles", Duration::from_secs(5), mirror_oracles),
        ("SH quadrature Gram matrix", Duration::from_secs(2), gram_matrix),
        ("beam shapes", Duration::from_secs(1), beam_shapes),
        ("sweet area", Duration::from_secs(30), sweet_area),
        ("tetrahedral A to B", Duration::from_secs(5), tetrahedral),
        ("order truncation", Duration::from_secs(1), truncation_rule),
        ("binaural properties", Duration::from_secs(5), binaural_properties),
        ("formats", Duration::from_secs(2), formats),
        ("compressor", Duration::from_secs(2), compressor),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("[PASS] {:>2}. {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {detail} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
