use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vbsync::harness::{
    decode_batch, parse_config, read_iq, render_plot, run_sweep_with, run_trial_detailed, write_csv, DecoderId,
    ExecMode, SweepConfig,
};
use vbsync::sigmodel::{Batch, PilotSpec};
use vbsync::Result;

#[derive(Parser)]
#[command(name = "vbsync", version, about = "Phase-uncertain receiver decoders and Monte Carlo sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an SNR sweep and write a CSV (and optionally an SVG plot).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_svg: Option<PathBuf>,
        /// Worker threads; 1 runs sequentially.
        #[arg(long)]
        workers: Option<usize>,
        /// Record mean wall time per batch (makes the CSV non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Decode stored observations and print per-symbol posteriors.
    Decode {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run one trial and dump everything it produced.
    Trial {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long)]
        decoder: DecoderId,
        #[arg(long)]
        seed: u64,
    },
}

fn load(path: &PathBuf) -> Result<SweepConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn fmt_probs(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { config, out_csv, out_svg, workers, timing } => {
            let mut cfg = load(&config)?;
            cfg.record_timing |= timing;
            let mode = match workers {
                Some(1) => ExecMode::Sequential,
                Some(n) => ExecMode::ParallelWith(n),
                None => ExecMode::Parallel,
            };
            let res = run_sweep_with(&cfg, mode)?;
            write_csv(&res, &out_csv)?;
            if let Some(svg) = out_svg {
                render_plot(&res, svg)?;
            }
            let flagged: u64 = res.cells.iter().map(|c| c.nonconverged).sum();
            let failed: u64 = res.cells.iter().map(|c| c.failures).sum();
            eprintln!(
                "wrote {} cells to {} ({flagged} non-converged trials, {failed} decoder errors)",
                res.cells.len(),
                out_csv.display()
            );
        }
        Command::Decode { config, input } => {
            let cfg = load(&config)?;
            let rows = read_iq(&input)?;
            let r = match cfg.noise_variance {
                Some(r) => r,
                None => cfg.noise_variance_at(*cfg.snr_db_list.first().unwrap_or(&0.0)),
            };
            println!("# periods={} noise_variance={r}", rows.len());
            for d in &cfg.decoders {
                let pilots = PilotSpec::leading(cfg.pilots_for(*d).min(rows.len()), cfg.pilot_symbol);
                let batch = Batch::new(rows.clone(), vec![], pilots)?;
                let out = decode_batch(*d, &batch, &cfg, r)?;
                println!(
                    "decoder={d} kappa={:.6}{:+.6}i iterations={} status={:?}",
                    out.kappa.re, out.kappa.im, out.iterations, out.status
                );
                for (i, sp) in out.posteriors.iter().enumerate() {
                    println!("{i} map={} p=[{}]", sp.map(), fmt_probs(sp.probs()));
                }
            }
        }
        Command::Trial { config, snr, decoder, seed } => {
            let mut cfg = load(&config)?;
            cfg.seed = seed;
            let rep = run_trial_detailed(&cfg, snr, decoder, 0)?;
            println!("decoder={} snr_db={} r={} true_phase={}", rep.decoder, rep.snr_db, rep.noise_variance, rep.true_phase);
            if let Some(e) = &rep.error {
                println!("error: {e}");
            }
            if let Some(d) = &rep.decoded {
                println!(
                    "kappa={:.6}{:+.6}i |kappa|={:.6} iterations={} status={:?}",
                    d.kappa.re,
                    d.kappa.im,
                    d.kappa.norm(),
                    d.iterations,
                    d.status
                );
                for (i, sp) in d.posteriors.iter().enumerate() {
                    let tag = if rep.batch.is_pilot(i) { " pilot" } else { "" };
                    println!("{i} truth={} map={} p=[{}]{tag}", rep.batch.truth()[i], sp.map(), fmt_probs(sp.probs()));
                }
            }
            let ok = rep.correct.iter().filter(|c| **c).count();
            println!("correct {ok}/{}", rep.correct.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
