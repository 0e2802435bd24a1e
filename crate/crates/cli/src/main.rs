use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use eip_core::calib::{estimate_thresholds, simulate_ramp_stream};
use eip_core::circuit::simulate_stream;
use eip_core::eip::{average_profiles, reconstruct_cycle};
use eip_core::eval::{evaluate_mae, foreground_of};
use eip_core::io::{
    read_events, read_normal_pfm, read_thresholds, write_events, write_normal_pfm,
    write_profile_csv, write_scalar_pfm, write_thresholds, RunConfig, ThresholdSource,
};
use eip_core::scene::make_sphere_scene;
use eip_core::solver::{apply_azimuth_offset, eventps_pixelwise, solve_pixelwise};
use eip_core::{EventStream, PixelThresholds, Vec3};

#[derive(Parser)]
#[command(
    name = "eip",
    version,
    about = "Event-camera photometric stereo from event interval profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a complete default run configuration.
    InitConfig {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the configured scene under the moving light and record events.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Event file; `.evt` or `.bin` selects the binary format.
        #[arg(long)]
        out: PathBuf,
        /// Write `<prefix>_normals.pfm` and `<prefix>_albedo.pfm`.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Record a calibration ramp of this power ratio instead, with the light
        /// fixed at the viewing direction.
        #[arg(long)]
        ramp_k: Option<f64>,
    },
    /// Estimate per-pixel thresholds from a ramp recording.
    Calibrate {
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        cycles: usize,
        /// Writes `<prefix>.pos.pfm`, `<prefix>.neg.pfm` and `<prefix>.calib`.
        #[arg(long)]
        out: PathBuf,
        /// Sensor size for text event files, square.
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Recover normals with the two-stage masked fit.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// Writes `<prefix>_normals.pfm`, `<prefix>_cost.pfm`, `<prefix>_labels.pfm`.
        #[arg(long)]
        out: PathBuf,
        /// Threshold map prefix, overriding the config.
        #[arg(long)]
        thresholds: Option<PathBuf>,
        /// Normal map whose non-zero pixels define the foreground.
        #[arg(long)]
        foreground: Option<PathBuf>,
    },
    /// Recover normals with the null-space baseline.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
    /// Compare a normal map to ground truth.
    Eval {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Writes `<prefix>_error.pfm` and `<prefix>_summary.txt`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump the averaged profile of one pixel as CSV.
    Profile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        thresholds: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_config(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading config {}", path.display()))
}

fn load_events(path: &Path, cfg: &RunConfig) -> Result<EventStream> {
    read_events(path, Some((cfg.resolution, cfg.resolution)))
        .with_context(|| format!("reading events {}", path.display()))
}

fn thresholds_for(cfg: &RunConfig, cli: Option<&Path>) -> Result<PixelThresholds> {
    let source = match cli {
        Some(p) => ThresholdSource::Files(p.to_path_buf()),
        None => cfg.threshold_source.clone(),
    };
    let th = match source {
        ThresholdSource::Uniform => cfg.uniform_thresholds(cfg.resolution, cfg.resolution)?,
        ThresholdSource::Files(prefix) => read_thresholds(&prefix)
            .with_context(|| format!("reading thresholds {}", prefix.display()))?,
    };
    if th.width() != cfg.resolution || th.height() != cfg.resolution {
        bail!(
            "threshold maps are {}x{}, config resolution is {}",
            th.width(),
            th.height(),
            cfg.resolution
        );
    }
    Ok(th)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::InitConfig { out } => {
            let text = RunConfig::default().to_string();
            match out {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{text}"),
            }
        }
        Command::Simulate {
            config,
            out,
            truth,
            ramp_k,
        } => {
            let cfg = load_config(&config)?;
            let scene = make_sphere_scene(cfg.resolution, cfg.scene)?
                .with_light_power(cfg.light_power)?
                .with_offset_light(cfg.offset_light)?;
            let circuit = cfg.circuit_config(thresholds_for(&cfg, None)?);
            let stream = match ramp_k {
                Some(k) => simulate_ramp_stream(
                    &scene,
                    &Vec3::new(0.0, 0.0, 1.0),
                    k,
                    cfg.cycles,
                    cfg.period,
                    &circuit,
                )?,
                None => simulate_stream(&scene, &cfg.trajectory()?, cfg.cycles, &circuit)?,
            };
            write_events(&out, &stream).with_context(|| format!("writing {}", out.display()))?;
            if let Some(prefix) = truth {
                write_normal_pfm(&with_suffix(&prefix, "_normals.pfm"), &scene.normal_map())?;
                write_scalar_pfm(&with_suffix(&prefix, "_albedo.pfm"), &scene.albedo_map())?;
            }
            println!(
                "{} events over {} cycles",
                stream.len(),
                stream.cycle_count()
            );
        }
        Command::Calibrate {
            events,
            k,
            cycles,
            out,
            resolution,
        } => {
            let stream = read_events(&events, resolution.map(|r| (r, r)))
                .with_context(|| format!("reading events {}", events.display()))?;
            let th = estimate_thresholds(&stream, k, cycles)?;
            write_thresholds(&out, &th)?;
            fs::write(
                with_suffix(&out, ".calib"),
                format!("k = {k}\ncycles = {cycles}\n"),
            )?;
            let flagged = (0..th.height())
                .flat_map(|y| (0..th.width()).map(move |x| (x, y)))
                .filter(|&(x, y)| th.is_flagged(x, y))
                .count();
            println!(
                "{} pixels calibrated, {flagged} flagged",
                th.width() * th.height() - flagged
            );
        }
        Command::Solve {
            config,
            events,
            out,
            thresholds,
            foreground,
        } => {
            let cfg = load_config(&config)?;
            let stream = load_events(&events, &cfg)?;
            let th = thresholds_for(&cfg, thresholds.as_deref())?;
            let fg = match foreground {
                Some(p) => Some(foreground_of(&read_normal_pfm(&p)?)),
                None => None,
            };
            let frame = solve_pixelwise(
                &stream,
                &th,
                &cfg.trajectory()?,
                &cfg.solver_config(),
                cfg.average_cycles,
                fg.as_ref(),
            )?;
            let normals = apply_azimuth_offset(&frame.normal_map(), cfg.azimuth_offset);
            write_normal_pfm(&with_suffix(&out, "_normals.pfm"), &normals)?;
            write_scalar_pfm(&with_suffix(&out, "_cost.pfm"), &frame.cost_map())?;
            write_scalar_pfm(&with_suffix(&out, "_labels.pfm"), &frame.label_map())?;
            println!(
                "{} pixels solved, {} unsolved",
                frame.solved_count(),
                frame.unsolved_count()
            );
        }
        Command::Baseline {
            config,
            events,
            out,
            thresholds,
        } => {
            let cfg = load_config(&config)?;
            let stream = load_events(&events, &cfg)?;
            let th = thresholds_for(&cfg, thresholds.as_deref())?;
            let normals = eventps_pixelwise(&stream, &th, &cfg.trajectory()?)?;
            write_normal_pfm(&out, &normals)?;
            let solved = normals.data().iter().filter(|n| n.is_some()).count();
            println!("{solved} pixels solved");
        }
        Command::Eval { result, truth, out } => {
            let result = read_normal_pfm(&result)
                .with_context(|| format!("reading {}", result.display()))?;
            let truth =
                read_normal_pfm(&truth).with_context(|| format!("reading {}", truth.display()))?;
            let report = evaluate_mae(&result, &truth, &foreground_of(&truth))?;
            write_scalar_pfm(&with_suffix(&out, "_error.pfm"), &report.error_map)?;
            let summary = format!(
                "mae_deg = {}\nevaluated = {}\nsentinel = {}\n",
                report.mae_deg, report.evaluated, report.sentinel
            );
            fs::write(with_suffix(&out, "_summary.txt"), &summary)?;
            print!("{summary}");
        }
        Command::Profile {
            config,
            events,
            x,
            y,
            out,
            thresholds,
        } => {
            let cfg = load_config(&config)?;
            let stream = load_events(&events, &cfg)?;
            if x >= stream.width() || y >= stream.height() {
                bail!(
                    "pixel ({x}, {y}) outside {}x{}",
                    stream.width(),
                    stream.height()
                );
            }
            let th = thresholds_for(&cfg, thresholds.as_deref())?;
            if th.is_flagged(x, y) {
                bail!("pixel ({x}, {y}) has no calibrated threshold");
            }
            let (h_p, h_n) = th.at(x, y);
            let period = stream.period().context("event file has no cycle syncs")?;
            let k = cfg.average_cycles;
            if stream.cycle_count() < k + 2 {
                bail!("{} cycles recorded, {} needed", stream.cycle_count(), k + 2);
            }
            let train = stream.per_pixel().swap_remove(y * stream.width() + x);
            let profiles = stream.cycle_syncs()[1..=k]
                .iter()
                .map(|&s| reconstruct_cycle(&train, h_p, h_n, period, s, cfg.samples))
                .collect::<eip_core::Result<Vec<_>>>()?;
            write_profile_csv(&out, &average_profiles(&profiles)?)?;
        }
    }
    Ok(())
}
