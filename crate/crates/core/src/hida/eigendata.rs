//! Eigendata packages on disk.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::form::{ClassicalForm, FormSpace, LiftedForm};
use super::germ::Germ;
use crate::error::{Error, Result};
use crate::mumford::Entry;
use crate::padic::{FieldDesc, PadicScalar};
use crate::tree::TreeEdge;

/// `group_package_ref` is a path, resolved against the eigendata file's
/// directory. Weight-two values are integers keyed by quotient edges (a key
/// may name a representative or its reverse). `alpha_series` (integers,
/// fractions or scalar text) is optional on input; `lift` fills it in.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EigendataJson {
    pub group_package_ref: String,
    #[serde(default)]
    pub alpha_series: Vec<String>,
    pub weight2_values: BTreeMap<String, i64>,
    pub assumption_alpha_sq_1: bool,
}

impl EigendataJson {
    /// The weight-two form on the quotient of `space`.
    pub fn weight_two(&self, space: &FormSpace) -> Result<ClassicalForm> {
        let fd = space.field();
        let mut given: HashMap<TreeEdge, i64> = HashMap::new();
        for (k, &v) in &self.weight2_values {
            given.insert(TreeEdge::parse(fd, k)?, v);
        }
        let mut vals = Vec::with_capacity(space.quotient.edges.len());
        for qe in &space.quotient.edges {
            let v = match (given.remove(&qe.rep), given.remove(&qe.rep.reverse())) {
                (Some(a), None) => a,
                (None, Some(b)) => -b,
                (Some(a), Some(b)) if a == -b => a,
                (Some(_), Some(_)) => return Err(Error::Invalid(format!("values on {} and its reverse disagree", qe.rep))),
                (None, None) => return Err(Error::Invalid(format!("no weight-two value on {}", qe.rep))),
            };
            vals.push(v);
        }
        if let Some(e) = given.keys().map(|e| e.to_string()).min() {
            return Err(Error::Invalid(format!("{e} is not a quotient edge")));
        }
        space.weight_two(&vals)
    }

    /// The stored α germ, if any.
    pub fn alpha(&self, field: &Arc<FieldDesc>) -> Result<Option<Germ>> {
        if self.alpha_series.is_empty() {
            return Ok(None);
        }
        let c = self.alpha_series.iter().map(|s| Entry::Text(s.clone()).scalar(field)).collect::<Result<Vec<_>>>()?;
        Germ::from_coeffs(c).map(Some)
    }

    /// The same package with α taken from a lift.
    pub fn with_alpha(&self, lifted: &LiftedForm) -> Self {
        let mut out = self.clone();
        out.alpha_series = lifted.alpha.to_json().coeffs;
        out
    }

    /// Refuse data whose claimed α(0)² = 1 is false.
    pub fn check_assumption(&self, alpha0: &PadicScalar) -> Result<()> {
        let fd = alpha0.field();
        let sq_one = alpha0.mul(alpha0)?.eq_mod(&PadicScalar::one(fd), fd.n - 1);
        if self.assumption_alpha_sq_1 && !sq_one {
            return Err(Error::Invalid(format!("package asserts α² = 1 but α(0) = {alpha0}")));
        }
        Ok(())
    }
}
