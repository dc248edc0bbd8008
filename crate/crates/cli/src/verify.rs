//! The `verify` command: evaluates the kernel's identities at the job's
//! target points and reports one line per identity.

use std::fmt;

use tscalc::exponentials::{delta_exp_function, nabla_exp_function};
use tscalc::solver::DEFAULT_PRODUCT_TOL;
use tscalc::{
    combined_e, delta_derivative, delta_exp, delta_to_nabla_param, diamond_derivative, diamond_derivative_of_delta_exp,
    diamond_derivative_of_nabla_exp, nabla_derivative, nabla_exp, rho_shift_delta_exp, rho_shift_nabla_exp, solve,
    DiamondBvp, Point, SolverConfig,
};

use crate::job::Job;

/// Relative tolerance used when the job gives none.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;

/// Residual bound for solver samples, relative to `max(1, |y|)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not applicable to this job, e.g. no `alpha` given.
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

/// Outcome of one identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

/// Tracks the worst relative error of one identity over its sample points.
struct Tally {
    name: &'static str,
    tol: f64,
    cases: usize,
    worst: f64,
    worst_at: f64,
    error: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Tally { name, tol, cases: 0, worst: 0.0, worst_at: f64::NAN, error: None }
    }

    fn compare(&mut self, at: f64, actual: f64, expected: f64) {
        self.cases += 1;
        let err = (actual - expected).abs() / expected.abs().max(1.0);
        if err > self.worst || err.is_nan() {
            self.worst = if err.is_nan() { f64::INFINITY } else { err };
            self.worst_at = at;
        }
    }

    /// Records a comparison whose operands may have failed to evaluate.
    fn try_compare(&mut self, at: f64, values: tscalc::Result<(f64, f64)>) {
        match values {
            Ok((a, b)) => self.compare(at, a, b),
            Err(e) if self.error.is_none() => self.error = Some(format!("at t = {at}: {e}")),
            Err(_) => {}
        }
    }

    fn finish(self, skip_reason: &str) -> Check {
        let (status, detail) = if let Some(e) = self.error {
            (Status::Fail, e)
        } else if self.cases == 0 {
            (Status::Skip, skip_reason.to_string())
        } else if self.worst <= self.tol {
            (Status::Pass, format!("{} cases, worst relative error {:e}", self.cases, self.worst))
        } else {
            (
                Status::Fail,
                format!("{} cases, relative error {:e} at t = {} exceeds {:e}", self.cases, self.worst, self.worst_at, self.tol),
            )
        };
        Check { name: self.name, status, detail }
    }
}

fn skip(name: &'static str, why: &str) -> Check {
    Check { name, status: Status::Skip, detail: why.to_string() }
}

/// Runs every identity in a fixed order.
pub fn verify(job: &Job) -> Vec<Check> {
    let ts = &job.ts;
    let tol = job.tol.unwrap_or(DEFAULT_VERIFY_TOL);
    let p = job.p.to_function();
    let t0 = &job.t0;
    let pts: &[Point] = &job.targets;
    let mut checks = Vec::new();

    let reg = ts.is_regular();
    checks.push(match &reg.violation {
        None => Check { name: "regularity", status: Status::Pass, detail: "time scale is regular".into() },
        Some((at, why)) => Check { name: "regularity", status: Status::Fail, detail: format!("at {at}: {why}") },
    });

    checks.push(match ts.atomic_partition() {
        Err(e) => skip("partition", &e.to_string()),
        Ok(part) => {
            let joined = part
                .switching_points
                .iter()
                .enumerate()
                .all(|(i, &s)| part.atoms[i].sup() == s && part.atoms[i + 1].inf() == s);
            let ends = part.atoms[0].inf() == ts.inf() && part.atoms.last().map(|a| a.sup()) == Some(ts.sup());
            let pass = joined && ends && part.atoms.iter().all(|a| a.is_regular().regular);
            let status = if pass { Status::Pass } else { Status::Fail };
            Check { name: "partition", status, detail: format!("{} atoms", part.atoms.len()) }
        }
    });

    let mut round_trip = Tally::new("jump round trip", 0.0);
    for t in pts {
        if ts.nu(t) > 0.0 {
            round_trip.compare(t.value(), ts.sigma(&ts.rho(t)).value(), t.value());
        }
        if ts.mu(t) > 0.0 {
            round_trip.compare(t.value(), ts.rho(&ts.sigma(t)).value(), t.value());
        }
    }
    checks.push(round_trip.finish("no scattered targets"));

    let mut duality = Tally::new("nabla-delta duality", tol);
    for t in pts.iter().filter(|t| ts.nu(t) > 0.0) {
        duality.try_compare(
            t.value(),
            nabla_derivative(&p, ts, t).and_then(|n| Ok((n, delta_derivative(&p, ts, &ts.rho(t))?))),
        );
    }
    checks.push(duality.finish("no left-scattered targets"));

    let mut convex = Tally::new("diamond convex combination", tol);
    if let Some(alpha) = job.alpha {
        for t in pts.iter().filter(|t| ts.in_kappa_upper(t) && ts.in_kappa_lower(t)) {
            convex.try_compare(
                t.value(),
                (|| {
                    let d = diamond_derivative(&p, ts, t, alpha)?;
                    let a = alpha.value();
                    Ok((d, a * delta_derivative(&p, ts, t)? + (1.0 - a) * nabla_derivative(&p, ts, t)?))
                })(),
            );
        }
    }
    checks.push(convex.finish("needs --alpha and interior targets"));

    let e = delta_exp_function(&p, ts, t0);
    let eh = nabla_exp_function(&p, ts, t0);
    let mut ivp = Tally::new("exponential initial value problems", tol);
    for t in pts {
        if ts.mu(t) > 0.0 {
            ivp.try_compare(t.value(), delta_derivative(&e, ts, t).map(|d| (d, p.eval(t) * e.eval(t))));
        }
        if ts.nu(t) > 0.0 {
            ivp.try_compare(t.value(), nabla_derivative(&eh, ts, t).map(|d| (d, p.eval(t) * eh.eval(t))));
        }
    }
    checks.push(ivp.finish("no scattered targets"));

    let mut semigroup = Tally::new("semigroup law", tol);
    for pair in pts.windows(2) {
        let (s, t) = (&pair[0], &pair[1]);
        semigroup.try_compare(
            t.value(),
            (|| Ok((delta_exp(&p, ts, t, s)?.value * delta_exp(&p, ts, s, t0)?.value, delta_exp(&p, ts, t, t0)?.value)))(),
        );
        semigroup.try_compare(
            t.value(),
            (|| Ok((nabla_exp(&p, ts, t, s)?.value * nabla_exp(&p, ts, s, t0)?.value, nabla_exp(&p, ts, t, t0)?.value)))(),
        );
        if let Some(alpha) = job.alpha {
            semigroup.try_compare(
                t.value(),
                (|| {
                    let lhs = combined_e(alpha, &p, ts, t, s)? * combined_e(alpha, &p, ts, s, t0)?;
                    Ok((lhs, combined_e(alpha, &p, ts, t, t0)?))
                })(),
            );
        }
    }
    checks.push(semigroup.finish("needs two or more targets"));

    let q = delta_to_nabla_param(&p, ts);
    let mut conversion = Tally::new("exponential conversion", tol);
    for t in pts {
        conversion.try_compare(t.value(), (|| Ok((nabla_exp(&q, ts, t, t0)?.value, delta_exp(&p, ts, t, t0)?.value)))());
    }
    checks.push(conversion.finish("no targets"));

    let mut shift = Tally::new("rho-shift identities", tol);
    for t in pts {
        let rho = ts.rho(t);
        shift.try_compare(t.value(), (|| Ok((rho_shift_delta_exp(&p, ts, t, t0)?, delta_exp(&p, ts, &rho, t0)?.value)))());
        shift.try_compare(t.value(), (|| Ok((rho_shift_nabla_exp(&p, ts, t, t0)?, nabla_exp(&p, ts, &rho, t0)?.value)))());
    }
    checks.push(shift.finish("no targets"));

    let mut log_linear = Tally::new("combined exponential log-linearity", tol);
    let mut closed_forms = Tally::new("diamond derivative closed forms", tol);
    if let Some(alpha) = job.alpha {
        let a = alpha.value();
        for t in pts {
            log_linear.try_compare(
                t.value(),
                (|| {
                    let lhs = combined_e(alpha, &p, ts, t, t0)?.ln();
                    let rhs = a * delta_exp(&p, ts, t, t0)?.value.ln() + (1.0 - a) * nabla_exp(&p, ts, t, t0)?.value.ln();
                    Ok((lhs, rhs))
                })(),
            );
            if ts.mu(t) > 0.0 && ts.nu(t) > 0.0 {
                closed_forms.try_compare(
                    t.value(),
                    (|| Ok((diamond_derivative_of_delta_exp(&p, ts, t, t0, alpha)?, diamond_derivative(&e, ts, t, alpha)?)))(),
                );
                closed_forms.try_compare(
                    t.value(),
                    (|| Ok((diamond_derivative_of_nabla_exp(&p, ts, t, t0, alpha)?, diamond_derivative(&eh, ts, t, alpha)?)))(),
                );
            }
        }
    }
    checks.push(log_linear.finish("needs --alpha"));
    checks.push(closed_forms.finish("needs --alpha and two-sided scattered targets"));

    checks.push(solver_residuals(job));
    checks
}

fn solver_residuals(job: &Job) -> Check {
    const NAME: &str = "solver residuals";
    let Some(alpha) = job.alpha else {
        return skip(NAME, "needs --alpha");
    };
    let mut bvp = DiamondBvp::new(job.ts.clone(), alpha, job.p.to_function(), job.t0, job.y0);
    if let Some(y) = job.y_rho {
        bvp = bvp.with_y_rho(y);
    }
    if let Some(f) = &job.f {
        bvp = bvp.with_forcing(f.to_function());
    }
    let targets: Vec<Point> =
        job.targets.iter().copied().filter(|t| job.ts.compare(t, &job.ts.rho(&job.t0)).is_ge()).collect();
    let cfg = SolverConfig { tol: DEFAULT_PRODUCT_TOL, max_factors: job.max_factors };
    match solve(&bvp, &targets, &cfg) {
        Err(e) => Check { name: NAME, status: Status::Fail, detail: e.to_string() },
        Ok(trace) => {
            let mut n = 0;
            let mut worst: f64 = 0.0;
            for s in &trace.samples {
                if let Some(r) = s.residual {
                    n += 1;
                    worst = worst.max(r.abs() / s.value.abs().max(1.0));
                }
            }
            if n == 0 {
                skip(NAME, "no two-sided scattered targets")
            } else if worst < RESIDUAL_TOL {
                Check { name: NAME, status: Status::Pass, detail: format!("{n} cases, worst scaled residual {worst:e}") }
            } else {
                Check { name: NAME, status: Status::Fail, detail: format!("scaled residual {worst:e} exceeds {RESIDUAL_TOL:e}") }
            }
        }
    }
}
