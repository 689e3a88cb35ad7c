//! Command-line front end for `molsig`: TOML run configurations, the five
//! experiments and their CSV or JSON tables.

pub mod commands;
pub mod config;
mod error;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

pub use config::{Experiment, RunConfig};
pub use error::CliError;
pub use table::{Format, Meta, ResultTable};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ResultTable,
    pub meta: Meta,
}

/// Runs `f` on a pool of `threads` workers (0 = one per core).
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<(T, usize), CliError> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
        let used = pool.current_num_threads();
        Ok((pool.install(f), used))
    }
    #[cfg(not(feature = "parallel"))]
    {
        if threads > 1 {
            log::warn!("built without the `parallel` feature; ignoring --threads {threads}");
        }
        Ok((f(), 1))
    }
}

/// Validates `cfg` for `experiment` and runs it.
pub fn run(experiment: Experiment, cfg: &RunConfig, threads: usize) -> Result<RunOutput, CliError> {
    cfg.validate(experiment)?;
    let mut cfg = cfg.clone();
    cfg.experiment = Some(experiment);
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let (table, used) = with_threads(threads, || commands::run(experiment, &cfg, molsig::Exec::default()))?;
    let table = table?;
    let meta = Meta {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: table::SCHEMA_VERSION,
        experiment: experiment.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        threads: used,
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
        config: cfg.to_toml(),
    };
    log::info!("{experiment}: {} rows in {:.3} s", table.rows.len(), meta.wall_clock_s);
    Ok(RunOutput { table, meta })
}

/// Writes the table to `path`, or stdout when `path` is `None`. CSV output to
/// a file gets a `<stem>.meta.json` sidecar holding the metadata.
pub fn write_output(out: &RunOutput, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Csv => {
            out.table.write_csv(&mut sink)?;
            if let Some(p) = path {
                let meta_path = p.with_extension("meta.json");
                let text = serde_json::to_string_pretty(&out.meta).map_err(|e| CliError::Output(e.to_string()))?;
                std::fs::write(meta_path, text + "\n")?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, &out.table.to_json(&out.meta))
                .map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    sink.flush()?;
    Ok(())
}
