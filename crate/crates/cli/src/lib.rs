//! Batch front end for the `qiedge` detector.
//!
//! Exit status: 0 when every image was processed, 1 for usage errors
//! (bad flags, invalid values, unreadable config, missing inputs), 2 when
//! some or all images failed or the run could not complete.

pub mod args;
pub mod batch;
pub mod report;
pub mod settings;

use std::ffi::OsString;
use std::fs;

use anyhow::Context;
use clap::Parser;
use qiedge::io::write_gray_png;

use crate::args::{Cli, Command, SynthArgs};
use crate::batch::run_batch;
use crate::report::RunReport;
use crate::settings::{Mode, RunManifest, UsageError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

/// What a command line asks for, after validation.
#[derive(Debug)]
pub enum Invocation {
    Run(Box<RunManifest>),
    Synth(SynthArgs),
}

pub fn parse_args<I, T>(argv: I) -> Result<Invocation, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| UsageError(e.to_string()))?;
    match cli.command {
        Command::Detect(a) => Ok(Invocation::Run(Box::new(RunManifest::resolve(
            Mode::Detect,
            &a,
        )?))),
        Command::Ablate(a) => Ok(Invocation::Run(Box::new(RunManifest::resolve(
            Mode::Ablate,
            &a,
        )?))),
        Command::Synth(s) => {
            if s.size < 16 {
                return Err(UsageError(format!(
                    "--size must be at least 16, got {}",
                    s.size
                )));
            }
            Ok(Invocation::Synth(s))
        }
    }
}

fn print_summary(report: &RunReport) {
    println!(
        "{}: {} image result(s), {} failure(s)",
        report.command,
        report.images.len(),
        report.failures.len()
    );
    for f in &report.failures {
        eprintln!("failed: {} [{}]: {}", f.input, f.stage, f.error);
    }
    if let Some(e) = &report.evaluation {
        let s = &e.scores;
        println!(
            "ODS {:.4}  OIS {:.4}  AP {:.4}  F@ODS {:.4}",
            s.ods, s.ois, s.ap, s.f_at_ods
        );
    }
    if let Some(rows) = &report.noise_sweep {
        println!("{:>8}  {:>7}  {:>7}  {:>7}", "sigma", "ODS", "OIS", "AP");
        for r in rows {
            println!(
                "{:>8}  {:>7.4}  {:>7.4}  {:>7.4}",
                r.sigma, r.scores.ods, r.scores.ois, r.scores.ap
            );
        }
    }
    if let Some(rows) = &report.ablation {
        println!("{:<18}  {:>7}  {:>7}  {:>7}", "variant", "ODS", "OIS", "AP");
        for r in rows {
            println!(
                "{:<18}  {:>7.4}  {:>7.4}  {:>7.4}",
                r.variant.name(),
                r.scores.ods,
                r.scores.ois,
                r.scores.ap
            );
        }
    }
}

fn write_synth(args: &SynthArgs) -> anyhow::Result<()> {
    let images = args.output.join("images");
    let gt = args.output.join("gt");
    for dir in [&images, &gt] {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    for sample in qiedge::synthetic::suite(args.size) {
        write_gray_png(images.join(format!("{}.png", sample.name)), &sample.image)?;
        write_gray_png(
            gt.join(format!("{}.png", sample.name)),
            &sample.ground_truth,
        )?;
    }
    println!("wrote {} and {}", images.display(), gt.display());
    Ok(())
}

/// Full command-line behavior; returns the process exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            print!("{e}");
            return EXIT_OK;
        }
    }
    let invocation = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {}", e.0.trim_start_matches("error: ").trim_end());
            return EXIT_USAGE;
        }
    };
    match invocation {
        Invocation::Synth(args) => match write_synth(&args) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e:#}");
                EXIT_FAILURE
            }
        },
        Invocation::Run(manifest) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            match run_batch(&manifest) {
                Ok(outcome) => {
                    print_summary(&outcome.report);
                    println!("report: {}", manifest.report.display());
                    outcome.exit_code
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    EXIT_FAILURE
                }
            }
        }
    }
}
