//! Reading input files. Everything here fails with exit code 2.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use padic_tree::hida::{EigendataJson, FormSpace};
use padic_tree::measure::{HarmonicMeasure, MeasureJson};
use padic_tree::mumford::{build_quotient, GroupPackage, QuotientGraph, SchottkyGroup};
use padic_tree::tree::{ExtPoint, TreeVertex};
use padic_tree::{FieldDesc, PadicScalar};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{CliError, CliResult, InputContext, RunConfig};

pub fn base_field(cfg: &RunConfig) -> CliResult<Arc<FieldDesc>> {
    FieldDesc::unramified(cfg.p, cfg.f, cfg.prec).input()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// {field?, tau}: τ in text form; the field defaults to ℚ_{p^{2f}}.
#[derive(Deserialize)]
struct PointJson {
    #[serde(default)]
    field: Option<FieldDesc>,
    tau: String,
}

/// {field?, points: [[n, τ], ...]}
#[derive(Deserialize)]
struct DivisorJson {
    #[serde(default)]
    field: Option<FieldDesc>,
    points: Vec<(i64, String)>,
}

fn ext_field(k: &Arc<FieldDesc>, given: Option<FieldDesc>) -> CliResult<Arc<FieldDesc>> {
    let l = match given {
        Some(f) => Arc::new(f),
        None => FieldDesc::unramified(k.p, 2 * k.f, k.n).input()?,
    };
    if l.p != k.p || l.n != k.n {
        return Err(CliError::Input(format!("point field {l:?} does not extend {k:?}")));
    }
    Ok(l)
}

fn point(k: &Arc<FieldDesc>, l: &Arc<FieldDesc>, s: &str) -> CliResult<ExtPoint> {
    let t = PadicScalar::parse(l, s).input()?;
    ExtPoint::new(t, k).input()
}

pub fn read_point(k: &Arc<FieldDesc>, path: &Path) -> CliResult<ExtPoint> {
    let j: PointJson = read_json(path)?;
    let l = ext_field(k, j.field)?;
    point(k, &l, &j.tau)
}

pub fn read_divisor(k: &Arc<FieldDesc>, path: &Path) -> CliResult<Vec<(i64, ExtPoint)>> {
    let j: DivisorJson = read_json(path)?;
    let l = ext_field(k, j.field)?;
    j.points.iter().map(|(n, s)| Ok((*n, point(k, &l, s)?))).collect()
}

pub fn vertex(k: &Arc<FieldDesc>, s: &str) -> CliResult<TreeVertex> {
    TreeVertex::parse(k, s).input()
}

/// A measure file, or the word `tate` for the Tate measure on K.
pub fn read_measure(k: &Arc<FieldDesc>, source: &str) -> CliResult<HarmonicMeasure> {
    if source == "tate" {
        return Ok(HarmonicMeasure::tate(k));
    }
    let j: MeasureJson = read_json(Path::new(source))?;
    if j.field.p != k.p || j.field.f != k.f {
        return Err(CliError::Input("measure lives over another field than --p/--f".into()));
    }
    let mut j = j;
    j.field.n = k.n;
    HarmonicMeasure::from_json(&j).input()
}

pub fn read_group(cfg: &RunConfig, path: &Path) -> CliResult<QuotientGraph> {
    let pkg: GroupPackage = read_json(path)?;
    if pkg.p != cfg.p || pkg.f != cfg.f {
        return Err(CliError::Input(format!("package is over p = {}, f = {}; flags say p = {}, f = {}", pkg.p, pkg.f, cfg.p, cfg.f)));
    }
    let g = SchottkyGroup::from_package(&pkg, cfg.prec).input()?;
    build_quotient(&g, cfg.depth).input()
}

pub struct Eigendata {
    pub json: EigendataJson,
    pub space: Arc<FormSpace>,
}

pub fn read_eigendata(cfg: &RunConfig, path: &Path) -> CliResult<Eigendata> {
    let json: EigendataJson = read_json(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let gpath: PathBuf = dir.join(&json.group_package_ref);
    let q = read_group(cfg, &gpath)?;
    let space = Arc::new(FormSpace::new(&q).input()?);
    Ok(Eigendata { json, space })
}
