//! The `mmw` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analyze::{run_analyze, StageError};
use crate::config::{parse_formats, ConfigLayer, RunConfig};
use crate::error::SounderError;
use crate::fit::run_fit;
use crate::format::{
    load_calibration, load_capture, save_calibration, save_capture, sniff, FileKind,
};
use crate::probe::{design, write_waveform_csv};
use crate::scene::run_synth;
use crate::text::{calibration_from_text, calibration_to_text, capture_from_text, capture_to_text};

#[derive(Debug, Parser)]
#[command(name = "mmw", version, about = "Switched-beam mm-wave channel sounder analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Directional/omni PDPs, path loss, delay spread and MPCs per location.
    Analyze(AnalyzeArgs),
    /// Path-loss and delay-spread models from locations tables.
    Fit(FitArgs),
    /// Render a synthetic capture from a scene file.
    Synth(SynthArgs),
    /// Design a low-PAPR multitone probe.
    Waveform(WaveformArgs),
    /// Capture or calibration file to text dump, or back.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Capture files; files sharing a location id are merged as RX sectors.
    pub inputs: Vec<PathBuf>,
    #[arg(long, short = 'c')]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub tail_fraction: Option<f64>,
    /// Directional noise gate, multiples of the beam pair's noise power.
    #[arg(long)]
    pub gate_factor: Option<f64>,
    /// Delay-spread support threshold, multiples of the omni noise power.
    #[arg(long)]
    pub support_factor: Option<f64>,
    /// none | hann
    #[arg(long)]
    pub window: Option<String>,
    /// Comma-separated: csv,json
    #[arg(long, value_delimiter = ',')]
    pub format: Vec<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// locations.csv files written by `analyze`.
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub center_freq_hz: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub format: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub scene: PathBuf,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Write the planted truth here instead of only printing it.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write a unit calibration file matching the capture.
    #[arg(long)]
    pub calibration_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WaveformArgs {
    #[arg(long, default_value_t = 801)]
    pub tones: usize,
    #[arg(long, default_value_t = 500e3)]
    pub spacing_hz: f64,
    #[arg(long, default_value_t = 1.0)]
    pub target_papr_db: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iters: usize,
    /// Tone table CSV.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    pub output: PathBuf,
}

fn convert(input: &Path, output: &Path) -> Result<String, SounderError> {
    let read_text = || std::fs::read_to_string(input).map_err(|e| SounderError::io(input, e));
    let write_text = |t: String| crate::atomic::write_atomic(output, t.as_bytes());
    match sniff(input)? {
        FileKind::Capture => write_text(capture_to_text(&load_capture(input)?)?).map(|_| "capture to text"),
        FileKind::Calibration => {
            write_text(calibration_to_text(&load_calibration(input)?)?).map(|_| "calibration to text")
        }
        FileKind::CaptureText => save_capture(output, &capture_from_text(&read_text()?)?).map(|_| "text to capture"),
        FileKind::CalibrationText => {
            save_calibration(output, &calibration_from_text(&read_text()?)?).map(|_| "text to calibration")
        }
        FileKind::Unknown => Err(SounderError::Format(format!(
            "{}: neither a capture, a calibration, nor a text dump",
            input.display()
        ))),
    }
    .map(String::from)
}

fn run(cli: Cli) -> Result<(), StageError> {
    let cfg_err = |e: SounderError| StageError::new("config", e);
    match cli.command {
        Command::Analyze(a) => {
            let flags = ConfigLayer {
                inputs: Some(a.inputs),
                calibration: a.calibration,
                scenario: a.scenario,
                tail_fraction: a.tail_fraction,
                directional_gate_factor: a.gate_factor,
                support_factor: a.support_factor,
                output_dir: a.out,
                formats: Some(a.format),
                window: a.window,
                center_freq_hz: None,
            };
            let rc = RunConfig::resolve(ConfigLayer::load(a.config.as_deref(), flags).map_err(cfg_err)?).map_err(cfg_err)?;
            let summaries = run_analyze(&rc)?;
            for s in &summaries {
                let r = &s.row;
                println!(
                    "{}  {}  d={} m  PL={:.2} dB  DS_omni={:.2} ns  DS_dir={}  MPCs={}",
                    r.location_id,
                    r.scenario.label(),
                    r.distance_m,
                    r.pl_db,
                    r.rms_ds_omni_s * 1e9,
                    r.rms_ds_dir_s.map(|v| format!("{:.2} ns", v * 1e9)).unwrap_or_else(|| "-".into()),
                    s.num_mpcs
                );
            }
            println!("wrote {}", rc.output_dir.display());
            Ok(())
        }
        Command::Fit(a) => {
            let flags = ConfigLayer {
                inputs: Some(a.inputs),
                output_dir: a.out,
                formats: Some(a.format),
                center_freq_hz: a.center_freq_hz,
                ..ConfigLayer::default()
            };
            let layer = ConfigLayer::load(a.config.as_deref(), flags).map_err(cfg_err)?;
            let formats = parse_formats(layer.formats).map_err(cfg_err)?;
            let out_dir = layer.output_dir.unwrap_or_else(|| PathBuf::from("mmw-fit"));
            let f = layer.center_freq_hz.unwrap_or(mmw_core::SounderConfig::default().center_freq_hz);
            let out = run_fit(&layer.inputs.unwrap_or_default(), f, &out_dir, formats)?;
            for r in &out.path_loss {
                match (r.n, r.p0_db, r.sigma) {
                    (Some(n), Some(p0), Some(s)) => println!(
                        "{:<11} {:<8} {:<3} n={n:.2} P0={p0:.2} sigma={s:.2} ks_p={}",
                        r.variant.label(),
                        r.scenario.label(),
                        r.family.label(),
                        r.ks_p.map(|p| format!("{p:.3}")).unwrap_or_else(|| "-".into())
                    ),
                    _ => println!(
                        "{:<11} {:<8} {:<3} skipped: {}",
                        r.variant.label(),
                        r.scenario.label(),
                        r.family.label(),
                        r.note
                    ),
                }
            }
            for r in &out.delay_spread {
                match (r.median_ns, r.mu, r.sigma) {
                    (Some(m), Some(mu), Some(s)) => println!(
                        "{:<8} {:<11} median={m:.2} ns mu={mu:.2} sigma={s:.3} (3GPP mu {:.2})",
                        r.scenario.label(),
                        r.variant.label(),
                        r.mu_3gpp
                    ),
                    _ => println!("{:<8} {:<11} skipped: {}", r.scenario.label(), r.variant.label(), r.note),
                }
            }
            println!("wrote {}", out_dir.display());
            Ok(())
        }
        Command::Synth(a) => {
            let truth = run_synth(&a.scene, &a.out, a.truth.as_deref(), a.calibration_out.as_deref())?;
            let json = serde_json::to_string_pretty(&truth).map_err(|e| StageError::new("write", SounderError::Format(e.to_string())))?;
            println!("{json}");
            Ok(())
        }
        Command::Waveform(a) => {
            let (spec, summary) = design(a.tones, a.spacing_hz, a.target_papr_db, a.max_iters)?;
            if let Some(p) = &a.out {
                write_waveform_csv(p, &spec).map_err(|e| StageError::new("write", e))?;
            }
            if let Some(p) = &a.summary {
                crate::report::save_json(p, &summary).map_err(|e| StageError::new("write", e))?;
            }
            print!("{}", summary.to_text());
            Ok(())
        }
        Command::Convert(a) => {
            let what = convert(&a.input, &a.output).map_err(|e| StageError::new("convert", e))?;
            println!("{what}: {}", a.output.display());
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mmw: error: {e}");
            e.exit_code()
        }
    }
}
