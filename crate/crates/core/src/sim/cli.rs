//! Command-line surface of the simulator.

use std::path::PathBuf;

use clap::Parser;

use super::{Controller, ExperimentConfig, Mode, Scheme, SchemeOverrides, DEFAULT_HORIZON};

#[derive(Debug, Parser)]
#[command(name = "hectl", about = "Simulate an encrypted controller on the benchmark plant")]
struct Args {
    #[arg(long, value_enum)]
    scheme: Scheme,
    #[arg(long, value_enum, default_value = "sf")]
    controller: Controller,
    #[arg(long, value_enum, default_value = "partial")]
    mode: Mode,
    /// Scaling factor s = 10^E.
    #[arg(long, default_value_t = 3)]
    scale_exp: u32,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Paillier prime size in bits.
    #[arg(long)]
    lambda: Option<u64>,
    /// LWE dimension or ring degree.
    #[arg(long)]
    dim: Option<usize>,
    /// Modulus q = 10^E.
    #[arg(long)]
    modulus_exp: Option<u32>,
    /// GSW gadget base or CKKS relinearization base.
    #[arg(long)]
    base: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// CKKS multiplicative depth budget.
    #[arg(long)]
    level: Option<u32>,
}

/// A parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: ExperimentConfig,
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first). Help and version requests come back
/// as errors too; `clap::Error::exit_code` tells them apart.
pub fn parse_cli<I, T>(argv: I) -> Result<Invocation, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let a = Args::try_parse_from(argv)?;
    Ok(Invocation {
        config: ExperimentConfig {
            scheme: a.scheme,
            controller: a.controller,
            mode: a.mode,
            scale_exp: a.scale_exp,
            horizon: a.horizon,
            seed: a.seed,
            params: SchemeOverrides {
                lambda: a.lambda,
                dim: a.dim,
                modulus_exp: a.modulus_exp,
                base: a.base,
                sigma: a.sigma,
                level: a.level,
            },
        },
        out: a.out,
    })
}

/// Inverse of [`parse_cli`]: a flag list (without program name) that parses
/// back to `inv`.
pub fn to_args(inv: &Invocation) -> Vec<String> {
    let c = &inv.config;
    let mut v = vec![
        format!("--scheme={}", c.scheme),
        format!("--controller={}", c.controller),
        format!("--mode={}", c.mode),
        format!("--scale-exp={}", c.scale_exp),
        format!("--horizon={}", c.horizon),
        format!("--seed={}", c.seed),
    ];
    if let Some(out) = &inv.out {
        v.push(format!("--out={}", out.display()));
    }
    let p = &c.params;
    let opts = [
        ("lambda", p.lambda.map(|x| x.to_string())),
        ("dim", p.dim.map(|x| x.to_string())),
        ("modulus-exp", p.modulus_exp.map(|x| x.to_string())),
        ("base", p.base.map(|x| x.to_string())),
        ("sigma", p.sigma.map(|x| x.to_string())),
        ("level", p.level.map(|x| x.to_string())),
    ];
    for (name, val) in opts {
        if let Some(val) = val {
            v.push(format!("--{name}={val}"));
        }
    }
    v
}
