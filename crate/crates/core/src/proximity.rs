//! Intuitionistic fuzzy proximity relations built per numeric attribute.
//!
//! Membership is `1 - |x-y| / range_max` and non-membership is
//! `|x-y| / (2(x+y))`. Both are symmetric and give `(1, 0)` on the diagonal.
//! Nothing forces `mu + nu <= 1` for small values, so relations are checked
//! with [`validate_proximity`] rather than clamped.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::round3;
use crate::table::InformationTable;

/// A (membership, non-membership) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IfDegree {
    pub mu: f64,
    pub nu: f64,
}

impl IfDegree {
    pub const IDENTITY: IfDegree = IfDegree { mu: 1.0, nu: 0.0 };

    pub fn new(mu: f64, nu: f64) -> Self {
        IfDegree { mu, nu }
    }

    pub fn in_unit_range(&self) -> bool {
        (0.0..=1.0).contains(&self.mu) && (0.0..=1.0).contains(&self.nu)
    }
}

pub fn membership_degree(x: f64, y: f64, range_max: f64) -> f64 {
    1.0 - (x - y).abs() / range_max
}

pub fn nonmembership_degree(x: f64, y: f64) -> f64 {
    if x == y {
        return 0.0;
    }
    (x - y).abs() / (2.0 * (x + y))
}

/// Dense symmetric `|U| × |U|` matrix of degrees for one attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityRelation {
    attribute: String,
    size: usize,
    degrees: Vec<IfDegree>,
}

impl ProximityRelation {
    /// Wraps an arbitrary row-major matrix. No axioms are enforced here;
    /// see [`validate_proximity`].
    pub fn from_degrees(attribute: impl Into<String>, size: usize, degrees: Vec<IfDegree>) -> Self {
        assert_eq!(degrees.len(), size * size, "degree matrix must be size x size");
        ProximityRelation {
            attribute: attribute.into(),
            size,
            degrees,
        }
    }

    pub fn attribute(&self) -> &str {
        &self.attribute
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn degree(&self, x: usize, y: usize) -> IfDegree {
        self.degrees[x * self.size + y]
    }

    /// The same relation with every non-membership set to zero, i.e. a plain
    /// fuzzy proximity relation.
    pub fn without_nonmembership(&self) -> Self {
        ProximityRelation {
            attribute: self.attribute.clone(),
            size: self.size,
            degrees: self
                .degrees
                .iter()
                .map(|d| IfDegree::new(d.mu, 0.0))
                .collect(),
        }
    }

    /// CSV with object labels as headers and `"mu,nu"` cells rounded to three decimals.
    pub fn to_csv(&self, labels: &[String]) -> Result<String> {
        assert_eq!(labels.len(), self.size);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(labels.iter().cloned());
        w.write_record(&header)?;
        for (x, label) in labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            for y in 0..self.size {
                let d = self.degree(x, y);
                row.push(format!("{},{}", round3(d.mu), round3(d.nu)));
            }
            w.write_record(&row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io("<proximity csv>", e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Builds the relation for one numeric attribute at full precision.
pub fn build_proximity(table: &InformationTable, attribute: &str) -> Result<ProximityRelation> {
    let spec = table.attribute(attribute)?;
    if !spec.is_numeric() {
        return Err(Error::NotNumericAttribute(attribute.to_string()));
    }
    let range_max = spec.range_max.expect("numeric spec has range_max");
    let values = table.numeric_column(attribute)?;
    let n = values.len();
    let mut degrees = vec![IfDegree::IDENTITY; n * n];
    for x in 0..n {
        for y in (x + 1)..n {
            let d = IfDegree::new(
                membership_degree(values[x], values[y], range_max),
                nonmembership_degree(values[x], values[y]),
            );
            degrees[x * n + y] = d;
            degrees[y * n + x] = d;
        }
    }
    Ok(ProximityRelation::from_degrees(attribute, n, degrees))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Diagonal must be exactly (1, 0).
    Reflexivity,
    Symmetry,
    /// Each component must lie in [0, 1].
    Range,
    /// mu + nu must not exceed 1.
    Sum,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Reflexivity => "reflexivity",
            Axiom::Symmetry => "symmetry",
            Axiom::Range => "range",
            Axiom::Sum => "mu+nu<=1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub attribute: String,
    pub x: usize,
    pub y: usize,
    pub axiom: Axiom,
    pub degree: IfDegree,
}

/// Lists every pair that breaks reflexivity, symmetry, the unit range, or
/// `mu + nu <= 1`. Symmetry violations are reported once per unordered pair.
pub fn validate_proximity(rel: &ProximityRelation) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |x, y, axiom, degree| {
        out.push(Violation {
            attribute: rel.attribute.clone(),
            x,
            y,
            axiom,
            degree,
        })
    };
    for x in 0..rel.size {
        for y in 0..rel.size {
            let d = rel.degree(x, y);
            if x == y && d != IfDegree::IDENTITY {
                push(x, y, Axiom::Reflexivity, d);
            }
            if x < y && rel.degree(y, x) != d {
                push(x, y, Axiom::Symmetry, d);
            }
            if !d.in_unit_range() {
                push(x, y, Axiom::Range, d);
            }
            if d.mu + d.nu > 1.0 {
                push(x, y, Axiom::Sum, d);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_table, AttributeSpec};

    #[test]
    fn membership_examples() {
        assert!((membership_degree(229.0, 227.0, 250.0) - 0.992).abs() < 1e-12);
        assert!((membership_degree(229.0, 191.0, 250.0) - 0.848).abs() < 1e-12);
        assert_eq!(membership_degree(77.0, 77.0, 250.0), 1.0);
    }

    #[test]
    fn nonmembership_examples() {
        assert!((nonmembership_degree(229.0, 227.0) - 2.0 / 912.0).abs() < 1e-15);
        assert_eq!(round3(nonmembership_degree(229.0, 227.0)), 0.002);
        assert!((nonmembership_degree(56.0, 53.0) - 3.0 / 218.0).abs() < 1e-15);
        assert_eq!(round3(nonmembership_degree(56.0, 53.0)), 0.014);
        assert_eq!(nonmembership_degree(5.0, 5.0), 0.0);
    }

    #[test]
    fn one_object_relation() {
        let t = load_table("id,IC\ni_1,5\n", &[AttributeSpec::numeric("IC", 250.0)]).unwrap();
        let r = build_proximity(&t, "IC").unwrap();
        assert_eq!(r.size(), 1);
        assert_eq!(r.degree(0, 0), IfDegree::IDENTITY);
        assert!(validate_proximity(&r).is_empty());
    }

    #[test]
    fn nominal_attribute_rejected() {
        let t = load_table("id,c\na,x\n", &[AttributeSpec::nominal("c")]).unwrap();
        assert!(matches!(
            build_proximity(&t, "c"),
            Err(Error::NotNumericAttribute(_))
        ));
    }

    #[test]
    fn reflexivity_violation_reported() {
        let mut d = vec![IfDegree::IDENTITY; 4];
        d[0] = IfDegree::new(0.9, 0.0);
        let r = ProximityRelation::from_degrees("a", 2, d);
        let v = validate_proximity(&r);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].x, v[0].y, v[0].axiom), (0, 0, Axiom::Reflexivity));
    }

    #[test]
    fn symmetry_violation_reported() {
        let mut d = vec![IfDegree::IDENTITY; 4];
        d[1] = IfDegree::new(0.5, 0.1);
        d[2] = IfDegree::new(0.5, 0.2);
        let v = validate_proximity(&ProximityRelation::from_degrees("a", 2, d));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].axiom, Axiom::Symmetry);
    }

    #[test]
    fn small_values_break_the_sum_constraint() {
        let t = load_table(
            "id,IC\na,1\nb,3\n",
            &[AttributeSpec::numeric("IC", 250.0)],
        )
        .unwrap();
        let r = build_proximity(&t, "IC").unwrap();
        let d = r.degree(0, 1);
        assert!((d.mu - 0.992).abs() < 1e-12);
        assert!((d.nu - 0.25).abs() < 1e-12);
        let v = validate_proximity(&r);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|v| v.axiom == Axiom::Sum));
        assert_eq!((v[0].x, v[0].y), (0, 1));
    }

    #[test]
    fn csv_export_rounds_cells() {
        let t = load_table(
            "id,IC\ni_1,229\ni_2,227\n",
            &[AttributeSpec::numeric("IC", 250.0)],
        )
        .unwrap();
        let r = build_proximity(&t, "IC").unwrap();
        let labels: Vec<String> = t.labels().map(String::from).collect();
        let csv = r.to_csv(&labels).unwrap();
        assert_eq!(csv, ",i_1,i_2\ni_1,\"1,0\",\"0.992,0.002\"\ni_2,\"0.992,0.002\",\"1,0\"\n");
    }
}
