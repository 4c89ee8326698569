use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use lsdp_core::baselines::{ridge, train_dmp, train_ridge, DmpGains};
use lsdp_core::io::{read_trajectory_file, write_trajectory_file};
use lsdp_core::path::rank_features;
use lsdp_core::segment::segment_demonstrations;
use lsdp_core::synth::{stream_from_demos, synth_demoset, PlantedSpec};
use lsdp_core::trainer::{primitive_path, train_clsdp, train_lsdp, PrimitiveMeta};
use lsdp_core::{
    CoefMatrix, DemoSet, Error, JointTrajectory, Mode, PathGrid, SolveOptions, TrainedPrimitive, TrainerConfig,
};
use serde_json::json;

use crate::policy::{Method, Model, PolicyFile};
use crate::report::{sig4, table, Row};
use crate::{CliError, EvalArgs, RankArgs, SegmentArgs, SynthArgs, TrainArgs};

type CmdResult = Result<(), CliError>;

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn load_demos(paths: &[PathBuf]) -> Result<Vec<JointTrajectory>, CliError> {
    paths
        .iter()
        .map(|p| read_trajectory_file(p).with_context(|| format!("loading {}", p.display())).map_err(CliError::from))
        .collect()
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn check_rate(traj: &JointTrajectory, rate: f64, what: &str) -> CmdResult {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(CliError::Usage(format!("--rate must be positive, got {rate}")));
    }
    let actual = 1.0 / traj.dt();
    if ((actual - rate) / rate).abs() > 1e-6 {
        return Err(anyhow::anyhow!("{what} is sampled at {actual} Hz, expected {rate} Hz").into());
    }
    Ok(())
}

pub fn segment(a: &SegmentArgs, out: &mut dyn Write) -> CmdResult {
    let stream = read_trajectory_file(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    check_rate(&stream, a.rate, "stream")?;
    let seg = segment_demonstrations(&stream, a.count as usize, a.window)?;
    create_dir(&a.out)?;
    let times = seg.peak_times(&stream);
    writeln!(out, "demo,peak_index,peak_time,start_index")?;
    for (k, demo) in seg.demos.demos().iter().enumerate() {
        let name = format!("demo_{}.csv", k + 1);
        write_trajectory_file(&a.out.join(&name), demo)?;
        writeln!(out, "{name},{},{},{}", seg.peaks[k], times[k], seg.starts[k])?;
    }
    Ok(())
}

fn single_demo(method: Method, demos: Vec<JointTrajectory>) -> Result<JointTrajectory, CliError> {
    if demos.len() != 1 {
        return Err(CliError::Usage(format!(
            "{} trains on exactly one demonstration, got {}",
            method.name(),
            demos.len()
        )));
    }
    Ok(demos.into_iter().next().expect("one demo"))
}

pub fn train(a: &TrainArgs, out: &mut dyn Write) -> CmdResult {
    let demos = load_demos(&a.demos)?;
    let names: Vec<String> = a.demos.iter().map(|p| file_name(p)).collect();
    let cfg = TrainerConfig {
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        epsilon: a.epsilon,
        max_outer_iters: a.max_iters,
        restarts: a.restarts as usize,
        seed: a.seed,
        cv_folds: a.cv_folds,
        ..TrainerConfig::default()
    };
    if matches!(a.method, Method::Dmp | Method::Ridge) && (a.lambda1.is_some() || a.cv_folds.is_some()) {
        return Err(CliError::Usage(format!("{} takes neither --lambda1 nor --cv-folds", a.method.name())));
    }
    let (policy, report, demo_label) = match a.method {
        Method::Lsdp | Method::Clsdp => {
            let (outcome, label, reported) = if a.method == Method::Lsdp {
                let demo = single_demo(a.method, demos)?;
                let o = train_lsdp(&demo, &cfg)?;
                let r = o.primitive.fit_report(std::slice::from_ref(&demo))?;
                (o, names[0].clone(), r)
            } else {
                let set = DemoSet::new(demos)?;
                let o = train_clsdp(&set, &cfg)?;
                let r = o.primitive.fit_report(set.demos())?;
                (o, "all".to_string(), r)
            };
            let config = serde_json::to_value(&cfg).context("encoding the configuration")?;
            (PolicyFile::from_primitive(&outcome.primitive, a.seed, config), reported, label)
        }
        Method::Dmp => {
            let demo = single_demo(a.method, demos)?;
            let model = train_dmp(&demo, a.n_basis, DmpGains::default())?;
            let r = model.fit_report(&demo)?;
            let config = json!({ "n_basis": a.n_basis, "gains": model.gains });
            (PolicyFile::from_dmp(&model, &demo, &r, config), r, names[0].clone())
        }
        Method::Ridge => {
            let demo = single_demo(a.method, demos)?;
            let lambda2 = a.lambda2.unwrap_or(ridge::DEFAULT_LAMBDA2);
            let model = train_ridge(&demo, a.n_basis, lambda2)?;
            let r = model.fit_report(&demo)?;
            let config = json!({ "n_basis": a.n_basis, "lambda2": lambda2 });
            (PolicyFile::from_ridge(&model, &demo, &r, config), r, names[0].clone())
        }
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    policy.save(&a.out)?;
    let row = Row { policy: file_name(&a.out), method: a.method.name().to_string(), demo: demo_label, report };
    write!(out, "{}", table(&[row]))?;
    Ok(())
}

pub fn rank(a: &RankArgs, out: &mut dyn Write) -> CmdResult {
    let policy = PolicyFile::load(&a.policy)?;
    let prim = match policy.to_model()? {
        Model::Primitive(p) => p,
        _ => return Err(Error::RankingUndefined(policy.method.name().to_string()).into()),
    };
    let demos = load_demos(&a.demos)?;
    let grid = PathGrid { count: a.grid, ratio: a.ratio };
    let path = primitive_path(&prim, &demos, grid, &SolveOptions::default())?;
    let ranking = rank_features(&path)?;
    writeln!(out, "rank,feature,entry_lambda,group")?;
    for (r, f) in ranking.ranked.iter().enumerate() {
        writeln!(out, "{},{},{},{}", r + 1, f.feature, sig4(f.entry_lambda), f.group)?;
    }
    if let Some(dest) = &a.out {
        let mut csv = String::from("lambda,feature_index,row_norm\n");
        for (lambda, coef) in path.lambdas.iter().zip(&path.coefs) {
            for (j, norm) in coef.row_norms().iter().enumerate() {
                csv.push_str(&format!("{lambda},{j},{norm}\n"));
            }
        }
        fs::write(dest, csv).with_context(|| format!("writing {}", dest.display()))?;
    }
    Ok(())
}

pub fn eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let (policies, demo_paths): (Vec<PathBuf>, Vec<PathBuf>) =
        a.files.iter().cloned().partition(|p| p.extension().is_some_and(|e| e == "json"));
    if policies.is_empty() || demo_paths.is_empty() {
        return Err(CliError::Usage("eval needs at least one policy (.json) and one demonstration".into()));
    }
    let demos = load_demos(&demo_paths)?;
    let mut rows = Vec::new();
    for path in &policies {
        let policy = PolicyFile::load(path)?;
        let model = policy.to_model().with_context(|| format!("loading {}", path.display()))?;
        let reports = model.fit_reports(&demos).with_context(|| format!("evaluating {}", path.display()))?;
        let coupled = matches!(&model, Model::Primitive(p) if p.mode == Mode::Coupled);
        for (k, report) in reports.into_iter().enumerate() {
            rows.push(Row {
                policy: file_name(path),
                method: policy.method.name().to_string(),
                demo: if coupled { "all".to_string() } else { file_name(&demo_paths[k]) },
                report,
            });
        }
    }
    let text = table(&rows);
    write!(out, "{text}")?;
    if let Some(dest) = &a.out {
        fs::write(dest, &text).with_context(|| format!("writing {}", dest.display()))?;
    }
    Ok(())
}

pub fn synth(a: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    if !(a.rate > 0.0 && a.rate.is_finite()) {
        return Err(CliError::Usage(format!("--rate must be positive, got {}", a.rate)));
    }
    let spec = PlantedSpec {
        n_samples: a.samples,
        n_dof: a.dofs,
        n_demos: a.demos,
        n_features: a.features,
        dt: 1.0 / a.rate,
        noise: a.noise,
        seed: a.seed,
        ..PlantedSpec::default()
    };
    let synth = synth_demoset(&spec)?;
    create_dir(&a.out)?;
    for (k, demo) in synth.demos.demos().iter().enumerate() {
        write_trajectory_file(&a.out.join(format!("demo_{}.csv", k + 1)), demo)?;
    }
    let stream = stream_from_demos(&synth.demos, a.gap)?;
    write_trajectory_file(&a.out.join("stream.csv"), &stream)?;

    let truth = &synth.truth;
    let first = &synth.demos.demos()[0];
    let mut prim = TrainedPrimitive {
        mode: Mode::Coupled,
        features: truth.features.clone(),
        coef: CoefMatrix::new(truth.coefs.clone())?,
        intercepts: truth.intercepts.clone(),
        meta: PrimitiveMeta {
            n_samples: first.n_samples(),
            n_dof: a.dofs,
            n_demos: a.demos,
            dt: first.dt(),
            duration: first.duration(),
            cost: 0.0,
            residual_norm: 0.0,
            iterations: 0,
            lambda1: 0.0,
            lambda2: 0.0,
            converged: true,
        },
    };
    let report = prim.fit_report(synth.demos.demos())?;
    prim.meta.cost = report.cost;
    prim.meta.residual_norm = report.res_norm;
    let config = serde_json::to_value(&spec).context("encoding the fixture spec")?;
    let mut policy = PolicyFile::from_primitive(&prim, a.seed, config);
    policy.ground_truth = true;
    policy.save(&a.out.join("truth.json"))?;
    writeln!(
        out,
        "wrote {} demos of {} samples, stream.csv ({} samples) and truth.json to {}",
        a.demos,
        first.n_samples(),
        stream.n_samples(),
        a.out.display()
    )?;
    Ok(())
}
