//! JSON documents for design problems.
//!
//! Numbers round-trip exactly. Infinite bounds are written as the strings
//! `"inf"` and `"-inf"`.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use signflip_core::linalg::CscMatrix;
use signflip_core::model::{
    AffineConstraintSet, AffineExpr, DesignBounds, DesignProblem, Metadata, ObjectiveSpec, SparseVec, VariableLayout,
    WeightedTerm,
};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid problem: {0}")]
    Model(#[from] signflip_core::Error),
}

/// A float that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v.is_finite() => s.serialize_f64(v),
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            _ => s.serialize_str("nan"),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Real(v)),
            Repr::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                other => Err(serde::de::Error::custom(format!("expected a number, \"inf\" or \"-inf\", got {other:?}"))),
            },
        }
    }
}

fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

fn floats(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutDoc {
    pub n_x: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsDoc {
    pub theta_min: Vec<f64>,
    pub theta_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintsDoc {
    /// Number of equality rows; needed when trailing rows are empty.
    #[serde(default)]
    pub rows: Option<usize>,
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub lower: Vec<Real>,
    pub upper: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDoc {
    pub weight: f64,
    pub rows: usize,
    pub triplets: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub offset: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveDoc {
    #[serde(default)]
    pub linear: SparseVec,
    #[serde(default)]
    pub quad_terms: Vec<TermDoc>,
    #[serde(default)]
    pub norm_terms: Vec<TermDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDoc {
    pub layout: LayoutDoc,
    pub bounds: BoundsDoc,
    pub constraints: ConstraintsDoc,
    #[serde(default)]
    pub objective: ObjectiveDoc,
    #[serde(default)]
    pub metadata: Metadata,
}

fn term_doc(t: &WeightedTerm) -> TermDoc {
    TermDoc {
        weight: t.weight,
        rows: t.expr.rows(),
        triplets: t.expr.matrix.triplets().collect(),
        offset: Some(t.expr.offset.clone()),
    }
}

fn term(doc: &TermDoc, dim: usize) -> Result<WeightedTerm, IoError> {
    let offset = doc.offset.clone().unwrap_or_else(|| vec![0.0; doc.rows]);
    let expr = AffineExpr::new(checked_matrix(doc.rows, dim, &doc.triplets)?, offset)?;
    Ok(WeightedTerm { weight: doc.weight, expr })
}

fn checked_matrix(rows: usize, cols: usize, trip: &[(usize, usize, f64)]) -> Result<CscMatrix, IoError> {
    if let Some(&(i, j, _)) = trip.iter().find(|&&(i, j, _)| i >= rows || j >= cols) {
        return Err(signflip_core::Error::Dimension(format!("entry ({i}, {j}) outside a {rows} x {cols} matrix")).into());
    }
    Ok(CscMatrix::from_triplets(rows, cols, trip))
}

impl ProblemDoc {
    pub fn from_problem(p: &DesignProblem) -> Self {
        let layout = p.layout();
        let c = p.constraints();
        let obj = p.objective();
        Self {
            layout: LayoutDoc { n_x: layout.n_x, m: layout.m },
            bounds: BoundsDoc { theta_min: p.bounds().theta_min().to_vec(), theta_max: p.bounds().theta_max().to_vec() },
            constraints: ConstraintsDoc {
                rows: Some(c.eq_matrix().nrows()),
                triplets: c.eq_matrix().triplets().collect(),
                rhs: c.eq_rhs().to_vec(),
                lower: reals(c.var_lower()),
                upper: reals(c.var_upper()),
            },
            objective: ObjectiveDoc {
                linear: obj.linear.clone(),
                quad_terms: obj.quad_terms.iter().map(term_doc).collect(),
                norm_terms: obj.norm_terms.iter().map(term_doc).collect(),
            },
            metadata: p.metadata.clone(),
        }
    }

    pub fn to_problem(&self) -> Result<DesignProblem, IoError> {
        let layout = VariableLayout::field(self.layout.n_x, self.layout.m);
        let dim = layout.dim();
        let c = &self.constraints;
        let rows = c.rows.unwrap_or(c.rhs.len());
        let g = checked_matrix(rows, dim, &c.triplets)?;
        let constraints = AffineConstraintSet::new(g, c.rhs.clone(), floats(&c.lower), floats(&c.upper))?;
        let mut objective = ObjectiveSpec::linear(self.objective.linear.clone());
        for t in &self.objective.quad_terms {
            objective.quad_terms.push(term(t, dim)?);
        }
        for t in &self.objective.norm_terms {
            objective.norm_terms.push(term(t, dim)?);
        }
        let bounds = DesignBounds::new(self.bounds.theta_min.clone(), self.bounds.theta_max.clone())?;
        Ok(DesignProblem::new(layout, constraints, objective, bounds, self.metadata.clone())?)
    }
}

pub fn problem_to_json(p: &DesignProblem) -> String {
    serde_json::to_string_pretty(&ProblemDoc::from_problem(p)).expect("problem documents always serialize")
}

pub fn problem_from_json(s: &str) -> Result<DesignProblem, IoError> {
    serde_json::from_str::<ProblemDoc>(s)?.to_problem()
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Write { path: path.display().to_string(), source })
}

pub fn read_problem(path: &Path) -> Result<DesignProblem, IoError> {
    problem_from_json(&read_text(path)?)
}

pub fn write_problem(path: &Path, p: &DesignProblem) -> Result<(), IoError> {
    write_text(path, &problem_to_json(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_bounds_are_strings() {
        let j = serde_json::to_string(&[Real(1.5), Real(f64::INFINITY), Real(f64::NEG_INFINITY)]).unwrap();
        assert_eq!(j, r#"[1.5,"inf","-inf"]"#);
        let back: Vec<Real> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, vec![Real(1.5), Real(f64::INFINITY), Real(f64::NEG_INFINITY)]);
        assert!(serde_json::from_str::<Real>(r#""big""#).is_err());
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        let doc = ProblemDoc {
            layout: LayoutDoc { n_x: 1, m: 1 },
            bounds: BoundsDoc { theta_min: vec![1.0], theta_max: vec![2.0] },
            constraints: ConstraintsDoc {
                rows: None,
                triplets: vec![(0, 7, 1.0)],
                rhs: vec![0.0],
                lower: vec![Real(f64::NEG_INFINITY); 3],
                upper: vec![Real(f64::INFINITY); 3],
            },
            objective: ObjectiveDoc::default(),
            metadata: Metadata::default(),
        };
        assert!(matches!(doc.to_problem(), Err(IoError::Model(_))));
    }
}
