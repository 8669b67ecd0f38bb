use std::path::Path;
use std::str::FromStr;

use ambikit::binaural::{binaural_render, load_hrir_set, synthetic_hrir_set, BinauralConfig};
use ambikit::decode::{
    analyze_decoder, apply_decoder, build_decoder_with, inside_layout, load_layout, square_grid,
    sweet_area_radius, DecoderMatrix, DecoderMethod, DecoderOptions, Geometry, SpeakerLayout, Weighting,
};
use ambikit::encode::{encode_source, load_scene, mix, render_scene, tetra_a_to_b, TetraGeometry};
use ambikit::io::{
    read_audio, read_pcm, read_sidecar, write_audio, write_pcm, write_sidecar, AudioData, ChannelOrdering,
    Container, FormatMeta, SampleFormat, Sidecar,
};
use ambikit::sh::{Direction, Normalization};
use ambikit::transform::{
    compress, directional_gain_fn, directional_warp, extract_segment, horizontal_subset, mirror, rotate,
    CompressorParams, Detector, HorizontalBuffer, MirrorPlane, RotationSpec, SpatialWindow,
};
use ambikit::{AmbiError, AmbisonicBuffer, Convention, Result};
use nalgebra::Vector3;
use serde_json::json;

use crate::{Cli, Command, DecoderArgs, InputArgs, OutputArgs, WindowArgs};

fn parse<T: FromStr<Err = AmbiError>>(s: &str) -> Result<T> {
    s.parse()
}

fn hint(text: &Option<String>) -> Result<Option<Convention>> {
    text.as_deref().map(parse).transpose()
}

fn horizontal_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    if Container::from_path(path)? == Container::Amb {
        return Ok(None);
    }
    Ok(read_sidecar(path)?.filter(|s| s.horizontal))
}

/// Reads a full-sphere or horizontal-only file as a canonical buffer.
fn load(path: &Path, hint: Option<Convention>) -> Result<AmbisonicBuffer> {
    if let Some(side) = horizontal_sidecar(path)? {
        let audio = read_pcm(path)?;
        let h = HorizontalBuffer::new(audio.sample_rate, audio.channels)?;
        if h.order() != side.order {
            return Err(AmbiError::MalformedSignal(format!(
                "sidecar declares order {} but file has {} channels",
                side.order,
                h.channel_count()
            )));
        }
        return Ok(h.to_full());
    }
    read_audio(path, hint)?.to_canonical()
}

fn load_input(input: &InputArgs) -> Result<AmbisonicBuffer> {
    load(&input.input, hint(&input.in_convention)?)
}

fn save(buffer: &AmbisonicBuffer, out: &OutputArgs) -> Result<()> {
    save_to(buffer, &out.out, out)
}

fn save_to(buffer: &AmbisonicBuffer, path: &Path, out: &OutputArgs) -> Result<()> {
    let mut meta = FormatMeta::for_path(path, buffer.order())?.with_sample_format(parse(&out.format)?);
    if let Some(c) = &out.out_convention {
        meta = meta.with_convention(parse(c)?);
    }
    write_audio(buffer, path, &meta)
}

fn written(cli: &Cli, path: &Path, buffer: &AmbisonicBuffer) {
    if cli.json {
        println!(
            "{}",
            json!({
                "output": path.display().to_string(),
                "order": buffer.order(),
                "channels": buffer.channel_count(),
                "frames": buffer.frames(),
                "sample_rate": buffer.sample_rate(),
            })
        );
    } else {
        println!(
            "wrote {}: order {}, {} channels, {} frames",
            path.display(),
            buffer.order(),
            buffer.channel_count(),
            buffer.frames()
        );
    }
}

fn written_audio(cli: &Cli, path: &Path, audio: &AudioData, what: &str) {
    if cli.json {
        println!(
            "{}",
            json!({
                "output": path.display().to_string(),
                "channels": audio.channel_count(),
                "frames": audio.frames(),
                "sample_rate": audio.sample_rate,
            })
        );
    } else {
        println!(
            "wrote {}: {} {what}, {} frames",
            path.display(),
            audio.channel_count(),
            audio.frames()
        );
    }
}

fn window(args: &WindowArgs) -> Result<SpatialWindow> {
    SpatialWindow::new(
        Direction::from_degrees(args.azimuth, args.elevation),
        args.inner.to_radians(),
        args.outer.to_radians(),
    )
}

fn decoder_for(
    layout: &SpeakerLayout,
    order: usize,
    args: &DecoderArgs,
) -> Result<DecoderMatrix> {
    let options = DecoderOptions {
        allow_truncation: args.allow_truncation,
        ..DecoderOptions::default()
    };
    build_decoder_with(
        layout,
        order,
        parse::<DecoderMethod>(&args.method)?,
        parse::<Weighting>(&args.weights)?,
        &options,
    )
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Info { input } => info(cli, input),
        Command::Encode {
            input,
            scene,
            order,
            azimuth,
            elevation,
            gain_db,
            output,
        } => {
            let buffer = match (input, scene) {
                (_, Some(scene)) => render_scene(&load_scene(scene)?)?,
                (Some(path), None) => {
                    let audio = read_pcm(path)?;
                    if audio.channel_count() != 1 {
                        return Err(AmbiError::InvalidArgument(format!(
                            "encode expects a mono file, '{}' has {} channels",
                            path.display(),
                            audio.channel_count()
                        )));
                    }
                    let gain = 10f64.powf(gain_db / 20.0);
                    let signal: Vec<f64> = audio.channels[0].iter().map(|v| v * gain).collect();
                    encode_source(
                        &signal,
                        audio.sample_rate,
                        Direction::from_degrees(*azimuth, *elevation),
                        *order,
                    )
                }
                (None, None) => {
                    return Err(AmbiError::InvalidArgument(
                        "encode needs an input file or --scene".into(),
                    ))
                }
            };
            save(&buffer, output)?;
            written(cli, &output.out, &buffer);
            Ok(())
        }
        Command::EncodeMic { input, alpha, output } => {
            let audio = read_pcm(input)?;
            let buffer = tetra_a_to_b(&audio, TetraGeometry::new(*alpha)?)?;
            save(&buffer, output)?;
            written(cli, &output.out, &buffer);
            Ok(())
        }
        Command::Mix {
            inputs,
            in_convention,
            output,
        } => {
            let h = hint(in_convention)?;
            let mut acc = load(&inputs[0], h)?;
            for path in &inputs[1..] {
                acc = mix(&acc, &load(path, h)?)?;
            }
            save(&acc, output)?;
            written(cli, &output.out, &acc);
            Ok(())
        }
        Command::Rotate {
            input,
            yaw,
            pitch,
            roll,
            output,
        } => {
            let b = rotate(&load_input(input)?, &RotationSpec::from_degrees(*yaw, *pitch, *roll))?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
        Command::Mirror { input, plane, output } => {
            let b = mirror(&load_input(input)?, parse::<MirrorPlane>(plane)?)?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
        Command::Dirgain {
            input,
            window: w,
            gain_db,
            output,
        } => {
            let win = window(w)?;
            let g = 10f64.powf(gain_db / 20.0);
            let b = directional_gain_fn(&load_input(input)?, |d| 1.0 + (g - 1.0) * win.gain(d))?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
        Command::Warp { input, scale, output } => {
            let s = *scale;
            let b = directional_warp(&load_input(input)?, |el| s * el)?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
        Command::Compress {
            input,
            threshold,
            ratio,
            attack,
            release,
            makeup,
            detector,
            output,
        } => {
            let params = CompressorParams::new(
                *threshold,
                *ratio,
                *attack,
                *release,
                *makeup,
                parse::<Detector>(detector)?,
            )?;
            let b = compress(&load_input(input)?, &params)?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
        Command::Segment {
            input,
            window: w,
            residual,
            output,
        } => {
            let (seg, res) = extract_segment(&load_input(input)?, &window(w)?)?;
            save(&seg, output)?;
            written(cli, &output.out, &seg);
            if let Some(path) = residual {
                save_to(&res, path, output)?;
                written(cli, path, &res);
            }
            Ok(())
        }
        Command::SubsetHorizontal { input, output } => subset(cli, input, output),
        Command::Decode {
            input,
            layout,
            order,
            decoder,
            out,
            format,
        } => {
            let buffer = load_input(input)?;
            let layout = load_layout(layout)?;
            let dec = decoder_for(&layout, order.unwrap_or(buffer.order()), decoder)?;
            let feeds = apply_decoder(&buffer, &dec)?;
            write_pcm(&feeds, out, parse(format)?)?;
            written_audio(cli, out, &feeds, "speaker feeds");
            Ok(())
        }
        Command::Analyze {
            layout,
            order,
            decoder,
            sources,
            grid,
            threshold,
            full,
        } => analyze(cli, layout, *order, decoder, *sources, *grid, *threshold, *full),
        Command::Binaural {
            input,
            hrir,
            synthetic_hrir: _,
            method,
            weights,
            yaw,
            pitch,
            roll,
            out,
            format,
        } => {
            let buffer = load_input(input)?;
            let hrirs = match hrir {
                Some(path) => load_hrir_set(path)?,
                None => synthetic_hrir_set(buffer.sample_rate()),
            };
            let config = BinauralConfig {
                method: parse(method)?,
                weighting: parse(weights)?,
                head: RotationSpec::from_degrees(*yaw, *pitch, *roll),
            };
            let stereo = binaural_render(&buffer, &hrirs, &config)?;
            write_pcm(&stereo, out, parse(format)?)?;
            written_audio(cli, out, &stereo, "ear signals");
            Ok(())
        }
        Command::Convert { input, output } => {
            let b = load_input(input)?;
            save(&b, output)?;
            written(cli, &output.out, &b);
            Ok(())
        }
    }
}

fn info(cli: &Cli, input: &InputArgs) -> Result<()> {
    let horizontal = horizontal_sidecar(&input.input)?.is_some();
    let (order, channels, convention, rate, frames) = if horizontal {
        let b = load_input(input)?;
        (b.order(), 2 * b.order() + 1, Convention::ACN_SN3D, b.sample_rate(), b.frames())
    } else {
        let b = read_audio(&input.input, hint(&input.in_convention)?)?;
        (b.order(), b.channel_count(), b.convention(), b.sample_rate(), b.frames())
    };
    if cli.json {
        println!(
            "{}",
            json!({
                "order": order,
                "channels": channels,
                "convention": convention.to_string(),
                "horizontal": horizontal,
                "sample_rate": rate,
                "frames": frames,
            })
        );
    } else {
        let suffix = if horizontal { " (horizontal)" } else { "" };
        println!("order: {order}, channels: {channels}, convention: {convention}{suffix}");
        println!("sample rate: {rate} Hz, frames: {frames}");
    }
    Ok(())
}

fn subset(cli: &Cli, input: &InputArgs, output: &OutputArgs) -> Result<()> {
    let container = Container::from_path(&output.out)?;
    if container == Container::Amb {
        return Err(AmbiError::UnsupportedFormat(
            "horizontal-only signals cannot be stored as .amb".into(),
        ));
    }
    if let Some(c) = &output.out_convention {
        if parse::<Convention>(c)? != Convention::ACN_SN3D {
            return Err(AmbiError::UnsupportedConvention(
                "horizontal-only output is written as acn/sn3d".into(),
            ));
        }
    }
    let h = horizontal_subset(&load_input(input)?)?;
    let audio = AudioData::new(h.sample_rate(), h.channels().to_vec())?;
    write_pcm(&audio, &output.out, parse::<SampleFormat>(&output.format)?)?;
    write_sidecar(
        &output.out,
        &Sidecar {
            order: h.order(),
            ordering: ChannelOrdering::Acn,
            normalization: Normalization::Sn3d,
            horizontal: true,
        },
    )?;
    written_audio(cli, &output.out, &audio, "horizontal channels");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    cli: &Cli,
    layout_path: &Path,
    order: usize,
    decoder: &DecoderArgs,
    source_count: usize,
    grid: usize,
    threshold: f64,
    full: bool,
) -> Result<()> {
    if source_count == 0 {
        return Err(AmbiError::InvalidArgument("--sources must be positive".into()));
    }
    let layout = load_layout(layout_path)?;
    let dec = decoder_for(&layout, order, decoder)?;
    let sources: Vec<Direction> = (0..source_count)
        .map(|k| Direction::from_degrees(360.0 * k as f64 / source_count as f64, 0.0))
        .collect();
    let mut positions: Vec<Vector3<f64>> = if grid == 0 {
        vec![Vector3::zeros()]
    } else {
        square_grid(grid, layout.array_radius())
            .into_iter()
            .filter(|p| inside_layout(&layout, p))
            .collect()
    };
    if positions.is_empty() {
        positions.push(Vector3::zeros());
    }
    let report = analyze_decoder(&dec, &layout, &sources, &positions)?;
    let radius = sweet_area_radius(&report, threshold);
    let centre = analyze_decoder(&dec, &layout, &sources, &[Vector3::zeros()])?;

    if cli.json {
        let mut value = serde_json::to_value(&report)?;
        if let Some(obj) = value.as_object_mut() {
            if !full {
                obj.remove("entries");
            }
            obj.insert("sweet_area_radius".into(), json!(radius));
            obj.insert("threshold_deg".into(), json!(threshold));
            obj.insert("order".into(), json!(order));
            obj.insert("method".into(), json!(dec.method().to_string()));
            obj.insert("weights".into(), json!(dec.weights()));
            obj.insert("centre".into(), serde_json::to_value(&centre.entries)?);
        }
        println!("{value}");
        return Ok(());
    }
    let geometry = match layout.geometry() {
        Geometry::Spherical3d => "3d",
        Geometry::Circular2d => "2d",
    };
    println!(
        "decoder: {}, order {order}, weights {}, {} speakers ({geometry})",
        dec.method(),
        decoder.weights,
        layout.len()
    );
    println!("positions: {}, sources: {source_count}", positions.len());
    println!("sweet area radius: {radius:.3} of array radius (threshold {threshold} deg)");
    println!("centre:");
    println!("{:>10} {:>10} {:>10} {:>10} {:>8}", "azimuth", "elevation", "rE err", "rV err", "|rE|");
    let step = source_count.div_ceil(24).max(1);
    for e in centre.entries.iter().step_by(step) {
        let mag = Vector3::from(e.r_e).norm();
        println!(
            "{:>10.1} {:>10.1} {:>10.2} {:>10.2} {:>8.3}",
            e.source_azimuth_deg, e.source_elevation_deg, e.error_e_deg, e.error_v_deg, mag
        );
    }
    Ok(())
}
