//! Command execution. Every command renders its whole report into a string
//! so that output is deterministic and can be compared byte for byte.

use std::fmt::Write as _;

use tscalc::exponentials::SampleBudget;
use tscalc::solver::DEFAULT_PRODUCT_TOL;
use tscalc::{
    check_regressivity, combined_E, combined_e, delta_exp, nabla_exp, solve, DiamondBvp, PointClass, SolverConfig,
};

use crate::job::{Command, Job};
use crate::verify::{verify, Status};
use crate::{CliError, EXIT_OK, EXIT_OTHER, EXIT_VALIDATION};

/// Rendered report plus the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub status: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, status: EXIT_OK }
    }
}

/// Runs a validated job.
pub fn run(job: &Job) -> Result<Outcome, CliError> {
    match job.command {
        Command::Partition => partition(job),
        Command::EvalExp => eval_exp(job),
        Command::Solve => run_solve(job),
        Command::Verify => run_verify(job),
        Command::RegressCheck => regress_check(job),
    }
}

fn class_name(c: PointClass) -> &'static str {
    match (c.left_dense, c.right_dense) {
        (true, true) => "dense",
        (false, false) => "scattered",
        (true, false) => "left-dense/right-scattered",
        (false, true) => "left-scattered/right-dense",
    }
}

fn partition(job: &Job) -> Result<Outcome, CliError> {
    let part = job.ts.atomic_partition()?;
    let mut out = String::from("item,index,lo,hi,class\n");
    for (i, atom) in part.atoms.iter().enumerate() {
        let class = if atom.is_dense_atom() { "dense" } else { "scattered" };
        writeln!(out, "atom,{i},{},{},{class}", atom.inf(), atom.sup()).unwrap();
        if let Some(&s) = part.switching_points.get(i) {
            let class = class_name(job.ts.classify(&job.ts.point(s)?));
            writeln!(out, "switch,{i},{s},{s},{class}").unwrap();
        }
    }
    Ok(Outcome::ok(out))
}

fn eval_exp(job: &Job) -> Result<Outcome, CliError> {
    let p = job.p.to_function();
    let mut out = String::from("t,delta_exp,nabla_exp");
    if job.alpha.is_some() {
        out.push_str(",combined_E,combined_e");
    }
    out.push('\n');
    for t in &job.targets {
        let e = delta_exp(&p, &job.ts, t, &job.t0)?.value;
        let eh = nabla_exp(&p, &job.ts, t, &job.t0)?.value;
        write!(out, "{},{e},{eh}", t.value()).unwrap();
        if let Some(alpha) = job.alpha {
            let big = combined_E(alpha, &p, &job.ts, t, &job.t0)?;
            let small = combined_e(alpha, &p, &job.ts, t, &job.t0)?;
            write!(out, ",{big},{small}").unwrap();
        }
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

fn run_solve(job: &Job) -> Result<Outcome, CliError> {
    let alpha = job.alpha.ok_or_else(|| CliError::Validation("solve needs --alpha".into()))?;
    let mut bvp = DiamondBvp::new(job.ts.clone(), alpha, job.p.to_function(), job.t0, job.y0);
    if let Some(y) = job.y_rho {
        bvp = bvp.with_y_rho(y);
    }
    if let Some(f) = &job.f {
        bvp = bvp.with_forcing(f.to_function());
    }
    let cfg = SolverConfig { tol: job.tol.unwrap_or(DEFAULT_PRODUCT_TOL), max_factors: job.max_factors };
    let trace = solve(&bvp, &job.targets, &cfg)?;
    let mut out = String::from("t,value,residual\n");
    for s in &trace.samples {
        write!(out, "{},{},", s.point.value(), s.value).unwrap();
        if let Some(r) = s.residual {
            write!(out, "{r}").unwrap();
        }
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

fn run_verify(job: &Job) -> Result<Outcome, CliError> {
    let checks = verify(job);
    let mut out = String::new();
    let mut failed = false;
    for c in &checks {
        failed |= c.status == Status::Fail;
        writeln!(out, "{} {}: {}", c.status, c.name, c.detail).unwrap();
    }
    Ok(Outcome { text: out, status: if failed { EXIT_OTHER } else { EXIT_OK } })
}

fn regress_check(job: &Job) -> Result<Outcome, CliError> {
    let mut budget = SampleBudget::default();
    if let (Some(first), Some(last)) = (job.targets.first(), job.targets.last()) {
        if first != last {
            budget.lo = first.value();
            budget.hi = last.value();
        }
    }
    let report = check_regressivity(&job.p.to_function(), &job.ts, budget);
    let mut out = String::from("key,value\n");
    writeln!(out, "window_lo,{}", budget.lo).unwrap();
    writeln!(out, "window_hi,{}", budget.hi).unwrap();
    writeln!(out, "points_checked,{}", report.points_checked).unwrap();
    writeln!(out, "regressive,{}", report.regressive).unwrap();
    writeln!(out, "nu_regressive,{}", report.nu_regressive).unwrap();
    for w in &report.witnesses {
        writeln!(out, "witness,{w}").unwrap();
    }
    for w in &report.nu_witnesses {
        writeln!(out, "nu_witness,{w}").unwrap();
    }
    let status = if report.regressive && report.nu_regressive { EXIT_OK } else { EXIT_VALIDATION };
    Ok(Outcome { text: out, status })
}
