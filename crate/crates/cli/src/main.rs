//! `ambikit` command-line frontend.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use ambikit::AmbiError;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "ambikit", version, about = "Encode, edit and decode ambisonic signals")]
pub struct Cli {
    /// Emit machine-readable JSON instead of text reports.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input ambisonic file (.wav, .caf or .amb).
    pub input: PathBuf,

    /// Convention of the input when the file carries none (acn/sn3d, acn/n3d, fuma).
    #[arg(long = "in-convention")]
    pub in_convention: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; the container follows the extension.
    #[arg(long, short)]
    pub out: PathBuf,

    /// Channel convention written to the output.
    #[arg(long = "out-convention")]
    pub out_convention: Option<String>,

    /// Sample format (pcm16, pcm24, pcm32, f32, f64).
    #[arg(long, default_value = "f64")]
    pub format: String,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Window centre azimuth in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub azimuth: f64,

    /// Window centre elevation in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub elevation: f64,

    /// Angular radius of the unity-gain region, degrees.
    #[arg(long, default_value_t = 30.0)]
    pub inner: f64,

    /// Angular radius where the window reaches zero, degrees.
    #[arg(long, default_value_t = 60.0)]
    pub outer: f64,
}

#[derive(Args, Debug, Clone)]
pub struct DecoderArgs {
    /// Decoder design: projection, modematch or allrad.
    #[arg(long, default_value = "projection")]
    pub method: String,

    /// Order weighting: none or maxre.
    #[arg(long, default_value = "none")]
    pub weights: String,

    /// Accept a truncated pseudo-inverse for ill-conditioned mode-matching.
    #[arg(long)]
    pub allow_truncation: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print order, channel count and convention of a file.
    Info {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Encode a mono file at a direction, or a JSON scene description.
    Encode {
        /// Mono input file (omit when using --scene).
        input: Option<PathBuf>,
        /// Scene description JSON.
        #[arg(long, conflicts_with = "input")]
        scene: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Azimuth in degrees (counterclockwise, 0 = front).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        azimuth: f64,
        /// Elevation in degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        elevation: f64,
        #[arg(long = "gain-db", default_value_t = 0.0, allow_negative_numbers = true)]
        gain_db: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convert a tetrahedral A-format recording (FLU, FRD, BLD, BRU) to first order.
    EncodeMic {
        input: PathBuf,
        /// Capsule pattern: 1 = omni, 0.5 = cardioid.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sum ambisonic files.
    Mix {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(long = "in-convention")]
        in_convention: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rotate the scene (yaw about z, then pitch about y, then roll about x; degrees).
    Rotate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        yaw: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        pitch: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        roll: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Mirror the scene at a plane (lr, fb, tb).
    Mirror {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        plane: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Boost or cut a spatial window.
    Dirgain {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Gain applied inside the window; outside stays at 0 dB.
        #[arg(long = "gain-db", allow_negative_numbers = true)]
        gain_db: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Warp elevations: el -> scale * el.
    Warp {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, allow_negative_numbers = true)]
        scale: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compress the scene with one gain keyed on the omnidirectional channel.
    Compress {
        #[command(flatten)]
        input: InputArgs,
        /// Threshold in dBFS.
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        threshold: f64,
        #[arg(long, default_value_t = 4.0)]
        ratio: f64,
        /// Attack time in ms.
        #[arg(long, default_value_t = 5.0)]
        attack: f64,
        /// Release time in ms.
        #[arg(long, default_value_t = 200.0)]
        release: f64,
        /// Makeup gain in dB.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        makeup: f64,
        /// Detector: peak or rms.
        #[arg(long, default_value = "peak")]
        detector: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Split the scene into a spatial window and the remainder.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Where to write the remainder.
        #[arg(long)]
        residual: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Keep only the horizontal (|m| = n) channels.
    SubsetHorizontal {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Decode to loudspeaker feeds.
    Decode {
        #[command(flatten)]
        input: InputArgs,
        /// Layout JSON.
        #[arg(long)]
        layout: PathBuf,
        /// Decoder order (defaults to the input order).
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        decoder: DecoderArgs,
        /// Feed file (.wav or .caf).
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value = "f64")]
        format: String,
    },
    /// Energy/velocity vector analysis of a decoder.
    Analyze {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long, default_value_t = 1)]
        order: usize,
        #[command(flatten)]
        decoder: DecoderArgs,
        /// Number of evenly spaced horizontal source directions.
        #[arg(long, default_value_t = 180)]
        sources: usize,
        /// Points per side of the square listening-position grid (0 = centre only).
        #[arg(long, default_value_t = 40)]
        grid: usize,
        /// Localization error threshold in degrees for the sweet area.
        #[arg(long, default_value_t = 30.0)]
        threshold: f64,
        /// Include every (source, position) entry in JSON output.
        #[arg(long)]
        full: bool,
    },
    /// Render to headphones through an HRIR set.
    Binaural {
        #[command(flatten)]
        input: InputArgs,
        /// HRIR manifest JSON.
        #[arg(long, required_unless_present = "synthetic_hrir")]
        hrir: Option<PathBuf>,
        /// Use the built-in synthetic HRIR set.
        #[arg(long, conflicts_with = "hrir")]
        synthetic_hrir: bool,
        /// Decoder design: projection or modematch.
        #[arg(long, default_value = "modematch")]
        method: String,
        #[arg(long, default_value = "none")]
        weights: String,
        /// Head orientation in degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        yaw: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        pitch: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        roll: f64,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long, default_value = "f64")]
        format: String,
    },
    /// Change container, convention or sample format.
    Convert {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Exit status for a library error.
fn exit_code(err: &AmbiError) -> u8 {
    match err {
        AmbiError::Parse { .. }
        | AmbiError::MalformedSignal(_)
        | AmbiError::UnsupportedFormat(_)
        | AmbiError::Io(_)
        | AmbiError::Json(_) => 3,
        AmbiError::InvalidArgument(_)
        | AmbiError::IllConditioned { .. }
        | AmbiError::UnsupportedConvention(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}
