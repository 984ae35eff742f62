//! lift, indefinite, check.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, ValueEnum};
use padic_tree::hida::{
    check_identities, decomposition_check, embedding_lattices, fixed_point_of_int_matrix, ordinary_lift, partial_lp,
    EdgeDistributions, FormSpace, Germ, Lattice, LiftOptions, LiftedForm, NuModel, Theta,
};
use padic_tree::mumford::{build_quotient, SchottkyGroup};
use padic_tree::tree::{reduction, ExtPoint, TreePoint};
use padic_tree::{FieldDesc, PadicScalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::geometry::scalar;
use crate::load::{base_field, read_eigendata, read_point, Eigendata};
use crate::{CliError, CliResult, InputContext, RunConfig};

fn lift_options(cfg: &RunConfig, iters: usize) -> LiftOptions {
    LiftOptions {
        iterations: iters,
        moments: cfg.moments,
        depth_cap: cfg.depth.min(cfg.prec),
        germ_order: cfg.germ_order,
        period: None,
    }
}

fn lift_of(cfg: &RunConfig, e: &Eigendata, iters: usize) -> CliResult<LiftedForm> {
    let phi = e.json.weight_two(&e.space).input()?;
    let lf = ordinary_lift(&e.space, &phi, &lift_options(cfg, iters))?;
    e.json.check_assumption(lf.alpha.value_at_zero()).input()?;
    Ok(lf)
}

fn germ_json(g: &Germ) -> Value {
    serde_json::to_value(g.to_json()).expect("serializable")
}

#[derive(Args, Debug)]
pub struct LiftArgs {
    #[arg(long)]
    eigendata: PathBuf,
    #[arg(long, default_value_t = 6)]
    iters: usize,
}

pub fn cmd_lift(cfg: &RunConfig, a: &LiftArgs) -> CliResult<Value> {
    let e = read_eigendata(cfg, &a.eigendata)?;
    let lf = lift_of(cfg, &e, a.iters)?;
    let n = cfg.prec;
    let rho = e.space.specialize(&lf.ctx, &lf.form, 2)?;
    let residual = lf.eigen_residual()?;
    Ok(json!({
        "alpha": germ_json(&lf.alpha),
        "alpha_prime": scalar(&lf.alpha.derivative(), residual),
        "residual_history": lf.residual_history,
        "eigen_residual_mod": residual,
        "rho2_matches_input": rho.eq_mod(&lf.weight_two, n),
        "eigendata": e.json.with_alpha(&lf),
    }))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// The ordinary lift of the weight-two values.
    Lift,
    /// The local model with α taken from alpha_series.
    Nu,
}

#[derive(Args, Debug)]
pub struct IndefiniteArgs {
    #[arg(long)]
    eigendata: PathBuf,
    /// Point file {field?, tau}.
    #[arg(long)]
    tau1: PathBuf,
    #[arg(long)]
    tau2: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Lift)]
    model: Model,
    #[arg(long, default_value_t = 6)]
    iters: usize,
}

fn source(cfg: &RunConfig, e: &Eigendata, model: Model, iters: usize) -> CliResult<Arc<dyn EdgeDistributions>> {
    if !e.json.assumption_alpha_sq_1 {
        return Err(CliError::Input("indefinite integrals need eigendata with α² = 1".into()));
    }
    Ok(match model {
        Model::Lift => Arc::new(lift_of(cfg, e, iters)?),
        Model::Nu => {
            let fd = e.space.field();
            let alpha = e.json.alpha(fd).input()?.ok_or_else(|| CliError::Input("the ν-model needs alpha_series".into()))?;
            e.json.check_assumption(alpha.value_at_zero()).input()?;
            Arc::new(NuModel::new(fd, alpha.truncate(cfg.germ_order), cfg.moments, cfg.depth.min(cfg.prec))?)
        }
    })
}

pub fn cmd_indefinite(cfg: &RunConfig, a: &IndefiniteArgs) -> CliResult<Value> {
    let e = read_eigendata(cfg, &a.eigendata)?;
    let k = base_field(cfg)?;
    let t1 = read_point(&k, &a.tau1)?;
    let t2 = read_point(&k, &a.tau2)?;
    let src = source(cfg, &e, a.model, a.iters)?;
    let r = decomposition_check(src.clone(), &t1, &t2, cfg.depth)?;
    let th1 = Theta::new(src.as_ref(), &t1)?;
    let th2 = Theta::new(src.as_ref(), &t2)?;
    let c = r.certified_mod;
    Ok(json!({
        "model": format!("{:?}", a.model).to_lowercase(),
        "alpha": germ_json(src.alpha()),
        "i_tau1": scalar(&th1.i_point()?, c),
        "i_tau2": scalar(&th2.i_point()?, c),
        "lhs": scalar(&r.lhs, c),
        "log_norm_term": scalar(&r.log_norm_term, c),
        "ord": r.ord.to_string(),
        "residual": scalar(&r.residual, c),
        "certified_mod": c,
        "residual_vanishes": r.vanishes_mod(c),
    }))
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Lift,
    Identities,
    Decomposition,
    Embedding,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Eigendata to test; defaults to the Tate curve q = 4p² with its
    /// balanced generator.
    #[arg(long)]
    eigendata: Option<PathBuf>,
    /// Random points per suite.
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[arg(long, default_value_t = 6)]
    iters: usize,
}

#[derive(Serialize)]
struct Outcome {
    suite: &'static str,
    name: String,
    ok: bool,
    detail: String,
}

fn default_space(cfg: &RunConfig) -> CliResult<Arc<FormSpace>> {
    let k = base_field(cfg)?;
    if k.f != 1 {
        return Err(CliError::Input("the built-in eigendata lives over ℚ_p; pass --f 1".into()));
    }
    let q = PadicScalar::from_int(&k, 4 * (k.p * k.p) as i64);
    let g = SchottkyGroup::tate_balanced(&q)?;
    Ok(Arc::new(FormSpace::new(&build_quotient(&g, cfg.depth)?)?))
}

/// a + p^j ξ with ξ random in ℤ_{p²}, inverted now and then.
fn random_tau(k: &Arc<FieldDesc>, rng: &mut ChaCha8Rng) -> CliResult<ExtPoint> {
    let l = FieldDesc::unramified(k.p, 2 * k.f, k.n)?;
    loop {
        let a = PadicScalar::random_integer(k, rng).embed_into(&l)?;
        let xi = PadicScalar::random_integer(&l, rng);
        let x = a.add(&xi.mul(&PadicScalar::p_power(&l, rng.gen_range(0..=2)))?)?;
        let x = if rng.gen_bool(0.3) && !x.is_zero() { x.inv()? } else { x };
        if let Ok(t) = ExtPoint::new(x, k) {
            return Ok(t);
        }
    }
}

pub fn cmd_check(cfg: &RunConfig, a: &CheckArgs) -> CliResult<Value> {
    let (space, lf) = match &a.eigendata {
        Some(p) => {
            let e = read_eigendata(cfg, p)?;
            let lf = lift_of(cfg, &e, a.iters)?;
            (e.space, lf)
        }
        None => {
            let space = default_space(cfg)?;
            let phi = space.weight_two(&vec![1; space.quotient.edges.len()])?;
            let lf = ordinary_lift(&space, &phi, &lift_options(cfg, a.iters))?;
            (space, lf)
        }
    };
    let k = space.field().clone();
    let n = cfg.prec;
    let tol = (n - 2).min(6);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out: Vec<Outcome> = Vec::new();
    let want = |s: Suite| a.suite == Suite::All || a.suite == s;

    if want(Suite::Lift) {
        let r = lf.eigen_residual()?;
        out.push(Outcome { suite: "lift", name: "U_p residual".into(), ok: r >= tol, detail: format!("≡ 0 mod p^{r}") });
        let rho = space.specialize(&lf.ctx, &lf.form, 2)?;
        let ok = rho.eq_mod(&lf.weight_two, n);
        out.push(Outcome { suite: "lift", name: "ρ₂(lift) = input".into(), ok, detail: format!("mod p^{n}") });
        let a0 = lf.alpha.value_at_zero();
        let sq = a0.mul(a0)?.eq_mod(&PadicScalar::one(&k), n - 1);
        out.push(Outcome { suite: "lift", name: "α(0)² = 1".into(), ok: sq, detail: a0.to_string() });
    }
    let alpha2 = lf.alpha.value_at_zero().mul(lf.alpha.value_at_zero())?.eq_mod(&PadicScalar::one(&k), n - 1);
    let nu0 = NuModel::new(&k, Germ::one(&k, cfg.germ_order), cfg.moments, cfg.depth.min(n))?;
    let mut g1 = Germ::one(&k, cfg.germ_order);
    if cfg.germ_order >= 1 {
        g1.coeffs[1] = PadicScalar::one(&k);
    }
    let nu1 = NuModel::new(&k, g1, cfg.moments, cfg.depth.min(n))?;
    let sources: Vec<(&str, Arc<dyn EdgeDistributions>)> =
        vec![("lift", Arc::new(lf.clone())), ("nu α′=0", Arc::new(nu0)), ("nu α′=1", Arc::new(nu1))];

    if want(Suite::Identities) {
        for (name, src) in &sources {
            for _ in 0..a.points {
                let tau = random_tau(&k, &mut rng)?;
                let th = Theta::new(src.as_ref(), &tau)?;
                let l = match reduction(&tau)? {
                    TreePoint::Vertex(v) => Lattice::of(&v),
                    TreePoint::Midpoint(e) => Lattice::of(&e.src),
                };
                for c in check_identities(&th, &l, n - 2)? {
                    out.push(Outcome { suite: "identities", name: format!("{name}: {}", c.name), ok: c.ok, detail: c.detail });
                }
            }
        }
    }
    if want(Suite::Decomposition) && alpha2 {
        for (name, src) in &sources {
            for _ in 0..a.points {
                let t1 = random_tau(&k, &mut rng)?;
                let t2 = random_tau(&k, &mut rng)?;
                let r = decomposition_check(src.clone(), &t1, &t2, cfg.depth)?;
                let m = (cfg.depth.min(6) - 2).min(r.certified_mod.max(0));
                out.push(Outcome {
                    suite: "decomposition",
                    name: format!("{name}: I(τ₁) − I(τ₂) = logNorm + 2αα′·ord"),
                    ok: r.vanishes_mod(m),
                    detail: format!("residual {} checked mod p^{m}", r.residual),
                });
            }
        }
    }
    if want(Suite::Embedding) {
        let mut done = 0;
        while done < a.points {
            let m = [[rng.gen_range(-9..=9), rng.gen_range(-9..=9)], [rng.gen_range(1..=9), rng.gen_range(-9..=9)]];
            let Ok(tau) = fixed_point_of_int_matrix(&k, m) else { continue };
            done += 1;
            let lats = embedding_lattices(&tau)?;
            let c = PadicScalar::from_int(&k, 1 + k.p as i64);
            let lp = partial_lp(&lf, &tau, &lats, &c)?;
            let th = Theta::new(&lf, &tau)?;
            let want_d = c.angle()?.mul(&th.i_point()?)?;
            let zero = PadicScalar::exact_zero(&k);
            out.push(Outcome {
                suite: "embedding",
                name: format!("L_p at the fixed point of {m:?}"),
                ok: lp.value_at_zero().eq_mod(&zero, n - 2) && lp.derivative().eq_mod(&want_d, 4),
                detail: format!("L_p(0) = {}, L_p′(0) = {}", lp.value_at_zero(), lp.derivative()),
            });
        }
    }
    let ok = out.iter().all(|o| o.ok);
    let v = json!({ "ok": ok, "checks": out, "alpha": germ_json(&lf.alpha) });
    if ok {
        Ok(v)
    } else {
        Err(CliError::Failed(v))
    }
}
