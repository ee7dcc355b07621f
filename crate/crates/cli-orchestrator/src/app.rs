//! Argument parsing and dispatch.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{Config, Key, COMMON};
use crate::error::{exit, CliError, CliResult};
use crate::experiments::{find, names, Ctx, Experiment, EXPERIMENTS};
use crate::manifest::{self, RunManifest, MANIFEST, SCHEMA_VERSION};
use crate::output::{to_sorted_json, Output};

/// Environment variable naming the default parent of output directories.
pub const OUT_ROOT_ENV: &str = "LFPP_OUT_ROOT";

fn key_help(keys: &[Key]) -> String {
    let mut s = String::from("Keys (set in [<experiment>] or [common], or as --key=value):\n");
    for k in COMMON.iter().chain(keys) {
        s.push_str(&format!("  {:<22} {:<10} default {:<22} {}\n", k.name, k.kind.name(), k.default, k.drives));
    }
    s
}

fn experiment_command(e: &Experiment) -> Command {
    Command::new(e.name)
        .about(e.about)
        .after_help(key_help(e.keys))
        .arg(Arg::new("config").long("config").value_name("FILE").help("TOML configuration file"))
        .arg(Arg::new("out").long("out").value_name("DIR").help("output directory"))
        .arg(
            Arg::new("overrides")
                .value_name("--KEY=VALUE")
                .num_args(0..)
                .trailing_var_arg(true)
                .allow_hyphen_values(true)
                .action(ArgAction::Append)
                .help("configuration overrides"),
        )
}

pub fn command() -> Command {
    Command::new("lfpp")
        .about("Monte Carlo experiments on log-correlated first-passage percolation")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .subcommand(Command::new("run").about("Run one experiment").subcommand_required(true).subcommands(EXPERIMENTS.iter().map(experiment_command)))
        .subcommand(
            Command::new("verify")
                .about("Check output digests of a run; --rerun also re-executes it")
                .arg(Arg::new("manifest").required(true).value_name("MANIFEST"))
                .arg(Arg::new("rerun").long("rerun").action(ArgAction::SetTrue).help("re-execute and byte-compare the outputs")),
        )
        .subcommand(Command::new("list").about("List experiments"))
}

/// Result of a completed run whose manifest was written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.manifest.passed { exit::OK } else { exit::CHECKS_FAILED }
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs `cfg.experiment` into `dir` and writes its manifest.
pub fn run_experiment(cfg: &Config, dir: &Path) -> CliResult<RunOutcome> {
    let e = find(&cfg.experiment).ok_or_else(|| CliError::Usage(format!("unknown experiment `{}`", cfg.experiment)))?;
    let started = unix_now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.usize("threads"))
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    let mut ctx = Ctx::new(cfg, Output::create(dir)?);
    pool.install(|| (e.run)(&mut ctx))?;
    let outputs = manifest::entries(dir, ctx.out.files())?;
    let passed = ctx.checks.iter().all(|c| c.passed);
    let m = RunManifest {
        schema_version: SCHEMA_VERSION,
        experiment: e.name.to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.to_json(),
        derived_seeds: ctx.seeds,
        started_unix: started,
        finished_unix: unix_now(),
        outputs,
        checks: ctx.checks,
        passed,
    };
    std::fs::write(dir.join(MANIFEST), to_sorted_json(&m)?)?;
    Ok(RunOutcome { dir: dir.to_path_buf(), manifest: m })
}

/// Checks digests; with `rerun`, re-executes into a scratch directory and
/// compares every output byte for byte.
pub fn verify(manifest_path: &Path, rerun: bool) -> CliResult<RunManifest> {
    let m = manifest::check_digests(manifest_path)?;
    if rerun {
        let e = find(&m.experiment).ok_or_else(|| CliError::Verify(format!("unknown experiment `{}` in manifest", m.experiment)))?;
        let cfg = Config::from_json(e.name, e.keys, &m.config)?;
        let scratch = std::env::temp_dir().join(format!("lfpp-verify-{}-{}", std::process::id(), unix_now()));
        let again = run_experiment(&cfg, &scratch);
        let result = again.and_then(|r| {
            let dir = manifest::run_dir(manifest_path);
            for entry in &m.outputs {
                let a = std::fs::read(dir.join(&entry.file))?;
                let b = std::fs::read(r.dir.join(&entry.file)).map_err(|_| CliError::Verify(format!("rerun did not produce {}", entry.file)))?;
                if a != b {
                    return Err(CliError::Verify(format!("rerun differs in {}", entry.file)));
                }
            }
            Ok(())
        });
        let _ = std::fs::remove_dir_all(&scratch);
        result?;
    }
    Ok(m)
}

fn out_dir(m: &ArgMatches, experiment: &str) -> PathBuf {
    if let Some(d) = m.get_one::<String>("out") {
        return PathBuf::from(d);
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root).join(experiment),
        None => PathBuf::from("lfpp-out").join(experiment),
    }
}

fn dispatch(m: &ArgMatches) -> CliResult<i32> {
    match m.subcommand() {
        Some(("run", sub)) => {
            let (name, em) = sub.subcommand().ok_or_else(|| CliError::Usage("missing experiment".into()))?;
            let e = find(name).ok_or_else(|| CliError::Usage(format!("unknown experiment `{name}`")))?;
            let file = match em.get_one::<String>("config") {
                Some(p) => Some(std::fs::read_to_string(p).map_err(|err| CliError::Config(format!("cannot read {p}: {err}")))?),
                None => None,
            };
            let overrides: Vec<String> = em.get_many::<String>("overrides").map(|v| v.cloned().collect()).unwrap_or_default();
            let cfg = Config::resolve(name, e.keys, file.as_deref(), &overrides, &names())?;
            let outcome = run_experiment(&cfg, &out_dir(em, name))?;
            for c in &outcome.manifest.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {}", outcome.dir.join(MANIFEST).display());
            Ok(outcome.exit_code())
        }
        Some(("verify", sub)) => {
            let path = PathBuf::from(sub.get_one::<String>("manifest").expect("required"));
            let m = verify(&path, sub.get_flag("rerun"))?;
            println!("verified {} outputs of {}", m.outputs.len(), m.experiment);
            Ok(exit::OK)
        }
        Some(("list", _)) => {
            for e in EXPERIMENTS {
                println!("{:<16} {}", e.name, e.about);
            }
            Ok(exit::OK)
        }
        _ => Err(CliError::Usage("missing subcommand".into())),
    }
}

/// Parses `args` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
        }
    };
    match dispatch(&m) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_with_leading_dashes_parse() {
        let m = command().try_get_matches_from(["lfpp", "run", "tails", "--out", "x", "--xi=0.2", "--n=5"]).unwrap();
        let (_, run) = m.subcommand().unwrap();
        let (name, em) = run.subcommand().unwrap();
        assert_eq!(name, "tails");
        let o: Vec<&String> = em.get_many::<String>("overrides").unwrap().collect();
        assert_eq!(o, ["--xi=0.2", "--n=5"]);
    }

    #[test]
    fn command_is_consistent() {
        command().debug_assert();
    }
}
