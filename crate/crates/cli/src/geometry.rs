//! tree, integrate, periods, linvariant.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_rational::Ratio;
use padic_tree::integral::{log_norm_part, log_part, mult_integral_divisor};
use padic_tree::measure::{eval_on_divisor, precision_offset};
use padic_tree::mumford::{l_invariant, periods, PeriodMap};
use padic_tree::tree::{reduction, TreePoint, TreeVertex};
use padic_tree::PadicScalar;
use serde_json::{json, Value};

use crate::load::{base_field, read_divisor, read_group, read_measure, read_point, vertex};
use crate::{CliError, CliResult, RunConfig};

fn ratio(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A scalar shown only to its certified precision.
pub fn scalar(x: &PadicScalar, prec: i64) -> String {
    x.truncate_abs(prec).to_string()
}

fn write_dot(cfg: &RunConfig, text: &str) -> CliResult<Option<String>> {
    match &cfg.dot {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Ok(Some(p.display().to_string()))
        }
        None => Ok(None),
    }
}

#[derive(Args, Debug)]
pub struct TreeArgs {
    /// List the p^f + 1 neighbors of a vertex "V(n;b)".
    #[arg(long)]
    neighbors: Option<String>,
    /// Path between two vertices.
    #[arg(long, num_args = 2, value_names = ["FROM", "TO"])]
    path: Option<Vec<String>>,
    /// Reduce the point in this JSON file {field?, tau}.
    #[arg(long)]
    reduce: Option<PathBuf>,
    /// Radius of the ball around v* exported with --dot.
    #[arg(long, default_value_t = 2)]
    radius: usize,
}

pub fn cmd_tree(cfg: &RunConfig, a: &TreeArgs) -> CliResult<Value> {
    let k = base_field(cfg)?;
    let mut out = serde_json::Map::new();
    if let Some(s) = &a.neighbors {
        let v = vertex(&k, s)?;
        let nb: Vec<String> = v.neighbors().iter().map(ToString::to_string).collect();
        out.insert("neighbors".into(), json!({ "vertex": v.to_string(), "count": nb.len(), "list": nb }));
    }
    if let Some(p) = &a.path {
        let (u, w) = (vertex(&k, &p[0])?, vertex(&k, &p[1])?);
        let edges: Vec<String> = u.path(&w).iter().map(ToString::to_string).collect();
        out.insert("path".into(), json!({ "from": u.to_string(), "to": w.to_string(), "length": edges.len(), "edges": edges }));
    }
    if let Some(path) = &a.reduce {
        let t = read_point(&k, path)?;
        let r = match reduction(&t)? {
            TreePoint::Vertex(v) => json!({ "kind": "vertex", "vertex": v.to_string() }),
            TreePoint::Midpoint(e) => json!({ "kind": "midpoint", "edge": e.to_string() }),
        };
        out.insert("reduction".into(), r);
    }
    if cfg.dot.is_some() {
        let base = TreeVertex::base(&k);
        let ball = base.ball_of_radius(a.radius);
        let mut s = String::from("graph tree {\n");
        for v in &ball {
            s.push_str(&format!("  \"{v}\";\n"));
        }
        for v in &ball {
            for e in v.out_edges() {
                if e.is_descending() && ball.contains(&e.dst) {
                    s.push_str(&format!("  \"{}\" -- \"{}\";\n", e.src, e.dst));
                }
            }
        }
        s.push_str("}\n");
        out.insert("dot".into(), json!(write_dot(cfg, &s)?));
    }
    if out.is_empty() {
        return Err(CliError::Input("tree needs --neighbors, --path, --reduce or --dot".into()));
    }
    Ok(Value::Object(out))
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    /// Measure JSON file, or `tate`.
    #[arg(long)]
    measure: String,
    /// Divisor JSON {field?, points: [[n, τ], ...]}.
    #[arg(long)]
    divisor: PathBuf,
}

pub fn cmd_integrate(cfg: &RunConfig, a: &IntegrateArgs) -> CliResult<Value> {
    let k = base_field(cfg)?;
    let mu = read_measure(&k, &a.measure)?;
    let div = read_divisor(&k, &a.divisor)?;
    if div.iter().map(|(n, _)| n).sum::<i64>() != 0 {
        return Err(CliError::Input("divisor must have degree 0".into()));
    }
    if div.is_empty() {
        return Err(CliError::Input("empty divisor".into()));
    }
    let x = mult_integral_divisor(&mu, &div, cfg.depth)?;
    let prec = x.guaranteed_prec;
    let pts: Vec<_> = div.iter().map(|(_, t)| t).collect();
    // the ord part is exact once D clears the reductions by two levels
    let offset = precision_offset(&pts)?;
    let ord_certified = cfg.depth >= offset + 2;
    let norm = cfg.norm.ord_norm();
    let ords: Vec<String> = x
        .components
        .iter()
        .map(|c| {
            ratio(c.ord_with(norm).expect("nonzero"))
        })
        .collect();
    // Σ n_i φ(red τ_i), the combinatorial side of the ord part
    let t0 = &div[0].1;
    let mut comb = vec![Ratio::from_integer(0); mu.rank()];
    for (n, t) in &div[1..] {
        for (c, v) in comb.iter_mut().zip(eval_on_divisor(&mu, t, t0)?) {
            *c += v * *n;
        }
    }
    let comb: Vec<String> = comb.into_iter().map(ratio).collect();
    let logs: Vec<String> = log_part(&x)?.iter().map(|v| scalar(v, prec)).collect();
    let lognorms: Vec<String> = log_norm_part(&x)?.iter().map(|v| scalar(v, prec)).collect();
    Ok(json!({
        "integral": x.to_json()?,
        "ord": ords,
        "ord_norm": cfg.norm,
        "ord_certified": ord_certified,
        "ord_from_divisor": comb,
        "log": logs,
        "log_norm": lognorms,
        "guaranteed_prec": prec,
        "precision_offset": offset,
    }))
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    /// Group package JSON.
    #[arg(long)]
    group: PathBuf,
}

pub fn cmd_periods(cfg: &RunConfig, a: &GroupArgs) -> CliResult<Value> {
    let q = read_group(cfg, &a.group)?;
    let per = periods(&q, cfg.depth)?;
    let prec = per.guaranteed_prec;
    let norm = cfg.norm.ord_norm();
    let rows: Vec<Vec<String>> =
        per.rows.iter().map(|r| r.components.iter().map(|c| scalar(c, prec + c.ord().unwrap().to_integer())).collect()).collect();
    let ords: Vec<Vec<String>> = per
        .rows
        .iter()
        .map(|r| {
            r.components
                .iter()
                .map(|c| {
                    ratio(c.ord_with(norm).unwrap())
                })
                .collect()
        })
        .collect();
    let dot = write_dot(cfg, &q.to_dot())?;
    Ok(json!({
        "genus": per.genus(),
        "quotient": { "vertices": q.vertices.len(), "edges": q.edges.len() },
        "q": rows,
        "ord_q": ords,
        "ord_norm": cfg.norm,
        "ord_symmetric": per.ord_is_symmetric(),
        "log_symmetric_mod": per.phi_symmetry(PeriodMap::Log)?,
        "guaranteed_prec": prec,
        "dot": dot,
    }))
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Phi {
    Log,
    Ord,
    LogNorm,
}

#[derive(Args, Debug)]
pub struct LinvArgs {
    #[arg(long)]
    group: PathBuf,
    #[arg(long, value_enum, default_value_t = Phi::Log)]
    phi: Phi,
}

pub fn cmd_linvariant(cfg: &RunConfig, a: &LinvArgs) -> CliResult<Value> {
    let q = read_group(cfg, &a.group)?;
    let per = periods(&q, cfg.depth)?;
    let phi = match a.phi {
        Phi::Log => PeriodMap::Log,
        Phi::Ord => PeriodMap::Ord,
        Phi::LogNorm => PeriodMap::LogNorm,
    };
    let lin = l_invariant(&per, phi)?;
    let prec = per.guaranteed_prec;
    let m: Vec<Vec<String>> = lin.matrix.iter().map(|r| r.iter().map(|x| scalar(x, prec)).collect()).collect();
    Ok(json!({
        "phi": format!("{:?}", a.phi).to_lowercase(),
        "matrix": m,
        "guaranteed_prec": prec,
    }))
}
