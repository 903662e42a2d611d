use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use kplume::gaussian::GaussianModel;
use kplume::montecarlo::simulate;
use kplume::KineticsParams;

use crate::args::{
    AtomFactor, CondvarArgs, KineticsArgs, KineticsFlags, McArgs, ModelFlags, ModelKind, PmfArgs,
    RerunArgs,
};
use crate::args::Command;
use crate::output::{format_float, Cell, Manifest, Metadata, Table, Writer};
use crate::verify;

/// Process exit status of a completed command.
pub type Status = u8;

pub fn run(command: &Command) -> Result<Status> {
    match command {
        Command::Kinetics(args) => kinetics(args),
        Command::Pmf(args) => pmf(args),
        Command::Condvar(args) => condvar(args),
        Command::Mc(args) => mc(args),
        Command::Verify(args) => verify::run(args),
        Command::Rerun(args) => rerun(args),
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Kinetics(_) => "kinetics",
        Command::Pmf(_) => "pmf",
        Command::Condvar(_) => "condvar",
        Command::Mc(_) => "mc",
        Command::Verify(_) => "verify",
        Command::Rerun(_) => "rerun",
    }
}

/// The `args` object recorded in a manifest.
pub fn recorded_args(command: &Command) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(command)?;
    Ok(v["args"].take())
}

fn resolved(params: &KineticsParams) -> serde_json::Value {
    let (pf, pa) = params.initial();
    json!({ "pi_f": pf, "pi_a": pa })
}

fn kinetics_json(k: &KineticsFlags) -> serde_json::Value {
    json!({ "a": k.a, "b": k.b, "init": k.init.to_string() })
}

fn model_json(k: &KineticsFlags, m: &ModelFlags) -> serde_json::Value {
    let mut v = kinetics_json(k);
    match m.model {
        ModelKind::Nn => v["xi"] = json!(m.xi),
        _ => {
            v["alpha"] = json!(m.alpha);
            v["beta"] = json!(m.beta);
        }
    }
    v
}

fn kinetics(args: &KineticsArgs) -> Result<Status> {
    let k = &args.kinetics;
    let params = k.params()?;
    let f = params.occupation_pmf(k.n)?;
    let meta = Metadata {
        model: "kinetics".into(),
        n: k.n,
        params: kinetics_json(k),
    };
    let mut w = Writer::new(&args.output.out, args.output.format)?;

    let mut table = Table::new("kinetics", &["k", "f_n_k"]);
    for (i, &p) in f.probs().iter().enumerate() {
        table.push(vec![Cell::Int(i as i64), Cell::Float(p)]);
    }
    w.table(&table, &meta)?;

    if args.modes {
        let modes = f.modes();
        let mut mt = Table::new("kinetics_modes", &["first", "last", "value"]);
        println!("modes of f_{}: {}", k.n, modes.count());
        for m in &modes.modes {
            println!("  k in [{}, {}]  f = {}", m.first, m.last, format_float(m.value));
            mt.push(vec![
                Cell::Int(m.first as i64),
                Cell::Int(m.last as i64),
                Cell::Float(m.value),
            ]);
        }
        w.table(&mt, &meta)?;
    }

    let cmd = Command::Kinetics(args.clone());
    w.finish("kinetics", recorded_args(&cmd)?, resolved(&params), None)?;
    println!("E[K_{}] = {}", k.n, format_float(f.mean()));
    Ok(0)
}

fn gaussian_y_grid(model: &GaussianModel, step: f64) -> Vec<f64> {
    let reach = 4.0 * (2.0 * model.n() as f64 * model.beta()).sqrt();
    let half = (reach / step).ceil() as i64;
    (-half..=half).map(|i| i as f64 * step).collect()
}

fn check_step(step: f64) -> Result<()> {
    if !(step.is_finite() && step > 0.0) {
        bail!(kplume::Error::InvalidConfig(format!(
            "grid step must be positive, got {step}"
        )));
    }
    Ok(())
}

fn pmf(args: &PmfArgs) -> Result<Status> {
    let k = &args.kinetics;
    let params = k.params()?;
    let meta = Metadata {
        model: args.model.model.name().into(),
        n: k.n,
        params: model_json(k, &args.model),
    };
    let mut w = Writer::new(&args.output.out, args.output.format)?;

    match args.model.dispersion() {
        Some(d) => {
            let pmf = d.joint_pmf(&params, k.n)?;
            if args.marginal {
                let mut t = Table::new("marginal", &["x", "p"]);
                for (x, p) in pmf.marginal_x() {
                    t.push(vec![Cell::Int(x), Cell::Float(p)]);
                }
                w.table(&t, &meta)?;
            } else {
                let mut t = Table::new("pmf", &["x", "y", "p"]);
                for (pt, p) in pmf.iter() {
                    t.push(vec![Cell::Int(pt.x), Cell::Int(pt.y), Cell::Float(p)]);
                }
                w.table(&t, &meta)?;
            }
            println!("points: {}  total mass: {}", pmf.len(), format_float(pmf.total_mass()));
        }
        None => {
            check_step(args.grid_step)?;
            let model = args.model.gaussian(k)?;
            let (lo, hi) = model.default_domain();
            let xs = GaussianModel::grid(lo, hi, args.grid_step);
            if args.marginal {
                let mut t = Table::new("marginal", &["x", "p"]);
                for &x in &xs {
                    t.push(vec![Cell::Float(x), Cell::Float(model.marginal_density(x))]);
                }
                w.table(&t, &meta)?;
            } else {
                let ys = gaussian_y_grid(&model, args.grid_step);
                let mut t = Table::new("pmf", &["x", "y", "p"]);
                for &x in &xs {
                    for &y in &ys {
                        t.push(vec![Cell::Float(x), Cell::Float(y), Cell::Float(model.density(x, y))]);
                    }
                }
                w.table(&t, &meta)?;
            }
            let mut atom = Table::new("pmf_atom", &["x", "y", "mass"]);
            atom.push(vec![Cell::Int(0), Cell::Int(0), Cell::Float(model.atom_mass())]);
            w.table(&atom, &meta)?;
            println!("atom mass at the origin: {}", format_float(model.atom_mass()));
        }
    }

    let cmd = Command::Pmf(args.clone());
    w.finish("pmf", recorded_args(&cmd)?, resolved(&params), None)?;
    Ok(0)
}

fn condvar(args: &CondvarArgs) -> Result<Status> {
    let k = &args.kinetics;
    let params = k.params()?;
    let mut meta = Metadata {
        model: args.model.model.name().into(),
        n: k.n,
        params: model_json(k, &args.model),
    };
    let mut w = Writer::new(&args.output.out, args.output.format)?;
    let mut t = Table::new("condvar", &["x", "marginal", "cond_mean", "cond_var"]);

    match args.model.dispersion() {
        Some(d) => {
            let curve = d.condvar(&params, k.n)?;
            for e in curve.entries() {
                t.push(vec![
                    Cell::Int(e.x),
                    Cell::Float(e.marginal),
                    Cell::Float(e.cond_mean),
                    Cell::Float(e.cond_var),
                ]);
            }
        }
        None => {
            check_step(args.grid_step)?;
            meta.params["atom_factor"] = json!(match args.atom_factor {
                AtomFactor::Keep => "keep",
                AtomFactor::Drop => "drop",
            });
            let model = args.model.gaussian(k)?;
            let (lo, hi) = model.default_domain();
            for x in GaussianModel::grid(lo, hi, args.grid_step) {
                let var = match args.atom_factor {
                    AtomFactor::Keep => model.condvar(x)?,
                    AtomFactor::Drop => model.condvar_continuous(x)?,
                };
                t.push(vec![
                    Cell::Float(x),
                    Cell::Float(model.marginal_density(x)),
                    Cell::Float(0.0),
                    Cell::Float(var),
                ]);
            }
        }
    }
    w.table(&t, &meta)?;
    println!("rows: {}", t.rows.len());

    let cmd = Command::Condvar(args.clone());
    w.finish("condvar", recorded_args(&cmd)?, resolved(&params), None)?;
    Ok(0)
}

fn mc(args: &McArgs) -> Result<Status> {
    let config = args.config()?;
    let summary = simulate(&config)?;
    let gauss = args.model.model == ModelKind::Gauss;
    let mut params = model_json(&args.kinetics, &args.model);
    params["particles"] = json!(args.particles);
    params["seed"] = json!(args.seed);
    if gauss {
        params["bin_width"] = json!(args.bin_width);
    }
    let meta = Metadata {
        model: args.model.model.name().into(),
        n: args.kinetics.n,
        params,
    };
    let coord = |i: i64| {
        if gauss {
            Cell::Float(summary.bin_bounds(i).0)
        } else {
            Cell::Int(i)
        }
    };

    let mut w = Writer::new(&args.output.out, args.output.format)?;
    let mut hist = Table::new("mc_histogram", &["x", "y", "count"]);
    for (pt, &c) in &summary.histogram {
        hist.push(vec![coord(pt.x), coord(pt.y), Cell::Count(c)]);
    }
    w.table(&hist, &meta)?;

    let total = summary.particles() as f64;
    let mut cv = Table::new("mc_condvar", &["x", "count", "marginal", "cond_mean", "cond_var"]);
    for (&x, s) in &summary.columns {
        cv.push(vec![
            coord(x),
            Cell::Count(s.count),
            Cell::Float(s.count as f64 / total),
            Cell::Float(s.mean),
            Cell::Float(s.variance()),
        ]);
    }
    w.table(&cv, &meta)?;
    println!("particles: {}  atom_count: {}", summary.particles(), summary.atom_count);

    let cmd = Command::Mc(args.clone());
    w.finish("mc", recorded_args(&cmd)?, resolved(&config.kinetics), Some(args.seed))?;
    Ok(0)
}

fn rerun(args: &RerunArgs) -> Result<Status> {
    let path = Path::new(&args.manifest);
    let manifest = Manifest::read(path)?;
    let mut command: Command = serde_json::from_value(json!({
        "command": manifest.command,
        "args": manifest.args,
    }))
    .with_context(|| format!("{} does not describe a runnable command", path.display()))?;

    let dir: String = match &args.out {
        Some(dir) => dir.clone(),
        None => path
            .parent()
            .map(PathBuf::from)
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or_else(|| PathBuf::from("."))
            .to_string_lossy()
            .into_owned(),
    };
    match &mut command {
        Command::Kinetics(a) => a.output.out = dir,
        Command::Pmf(a) => a.output.out = dir,
        Command::Condvar(a) => a.output.out = dir,
        Command::Mc(a) => a.output.out = dir,
        Command::Verify(a) => a.out = Some(dir),
        Command::Rerun(_) => bail!("a manifest cannot record a rerun"),
    }
    eprintln!("re-running `{}` from {}", command_name(&command), path.display());
    run(&command)
}
