//! File formats: canonical JSON for fields and maps, CSV for evolution
//! records.
//!
//! A field file is
//! `{"truncation_degree": N, "pieces": [{"t_start": t, "terms": [...]}]}`
//! and a map file is the same object without the piece wrapper. Each term is
//! `{"component": 1|2, "alpha": [a1, a2], "re": x, "im": y}`. The linear
//! part is implied by the normalization (`-id` for fields, `id` for maps)
//! and omitted from canonical output unless it deviates bitwise from the
//! implied value; explicit normalization terms are accepted on input when
//! they are consistent within tolerance. Emission goes through a sorted-key
//! JSON value with shortest-round-trip floats, so emit -> parse -> emit is
//! byte-stable and parses back to the identical value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::herglotz::HerglotzField;
use crate::loewner::EvolutionRecord;
use crate::series::{Component, MultiIndex, PolyMap2, PolySeries, NORMALIZATION_TOL};

/// One coefficient record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    pub component: u8,
    pub alpha: [u32; 2],
    pub re: f64,
    pub im: f64,
}

/// One time piece of a serialized field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PieceRecord {
    pub t_start: f64,
    pub terms: Vec<TermRecord>,
}

/// Serialized field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldRecord {
    pub truncation_degree: u32,
    pub pieces: Vec<PieceRecord>,
}

/// Serialized map.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapRecord {
    pub truncation_degree: u32,
    pub terms: Vec<TermRecord>,
}

/// Implied coefficient of the normalization: `lin` on the diagonal linear
/// terms, 0 on the constant and cross-linear terms, and no implication
/// elsewhere.
fn implied(lin: f64, component: Component, alpha: MultiIndex) -> Option<f64> {
    match (component, alpha.a1, alpha.a2) {
        (Component::One, 1, 0) | (Component::Two, 0, 1) => Some(lin),
        (_, 0, 0) | (Component::One, 0, 1) | (Component::Two, 1, 0) => Some(0.0),
        _ => None,
    }
}

fn map_terms(map: &PolyMap2, lin: f64) -> Vec<TermRecord> {
    let mut terms = Vec::new();
    for j in [Component::One, Component::Two] {
        for (alpha, c) in map.component(j).terms() {
            if let Some(value) = implied(lin, j, alpha) {
                if c.re == value && c.im == 0.0 {
                    continue;
                }
            }
            terms.push(TermRecord {
                component: j.index(),
                alpha: [alpha.a1, alpha.a2],
                re: c.re,
                im: c.im,
            });
        }
    }
    terms.sort_by_key(|t| (t.component, t.alpha[0], t.alpha[1]));
    terms
}

fn terms_to_map(terms: &[TermRecord], trunc: u32, lin: f64) -> Result<PolyMap2> {
    let mut map = PolyMap2::identity(trunc);
    *map.component_mut(Component::One) = PolySeries::zero(trunc);
    *map.component_mut(Component::Two) = PolySeries::zero(trunc);
    map.component_mut(Component::One)
        .set_coeff(MultiIndex::new(1, 0), Complex64::new(lin, 0.0));
    map.component_mut(Component::Two)
        .set_coeff(MultiIndex::new(0, 1), Complex64::new(lin, 0.0));

    let mut seen = std::collections::BTreeSet::new();
    for term in terms {
        let j = Component::from_index(term.component)
            .map_err(|_| Error::Schema(format!("component must be 1 or 2, got {}", term.component)))?;
        let alpha = MultiIndex::new(term.alpha[0], term.alpha[1]);
        if alpha.degree() > trunc {
            return Err(Error::Schema(format!(
                "term ({},{}) exceeds the truncation degree {trunc}",
                alpha.a1, alpha.a2
            )));
        }
        if !seen.insert((term.component, term.alpha)) {
            return Err(Error::Schema(format!(
                "duplicate term for component {} at ({},{})",
                term.component, alpha.a1, alpha.a2
            )));
        }
        let value = Complex64::new(term.re, term.im);
        if let Some(expected) = implied(lin, j, alpha) {
            if (value - Complex64::new(expected, 0.0)).norm() > NORMALIZATION_TOL {
                return Err(Error::Schema(format!(
                    "explicit normalization term at component {} ({},{}) is inconsistent: expected {expected}, got {value}",
                    term.component, alpha.a1, alpha.a2
                )));
            }
        }
        map.component_mut(j).set_coeff(alpha, value);
    }
    Ok(map)
}

/// Serialize a field to its record form.
pub fn field_to_record(field: &HerglotzField) -> FieldRecord {
    FieldRecord {
        truncation_degree: field.truncation_degree(),
        pieces: field
            .pieces()
            .iter()
            .map(|p| PieceRecord { t_start: p.t_start, terms: map_terms(&p.map, -1.0) })
            .collect(),
    }
}

/// Validate and build a field from its record form.
pub fn record_to_field(record: &FieldRecord) -> Result<HerglotzField> {
    let pieces = record
        .pieces
        .iter()
        .map(|p| Ok((p.t_start, terms_to_map(&p.terms, record.truncation_degree, -1.0)?)))
        .collect::<Result<Vec<_>>>()?;
    HerglotzField::new(pieces)
}

/// Serialize a normalized map to its record form.
pub fn map_to_record(map: &PolyMap2) -> MapRecord {
    MapRecord {
        truncation_degree: map.truncation_degree(),
        terms: map_terms(map, 1.0),
    }
}

/// Validate and build a map from its record form.
pub fn record_to_map(record: &MapRecord) -> Result<PolyMap2> {
    let map = terms_to_map(&record.terms, record.truncation_degree, 1.0)?;
    map.check_linear_part(1.0, NORMALIZATION_TOL)?;
    Ok(map)
}

/// Canonical JSON: sorted keys (via the value representation), two-space
/// indentation, shortest-round-trip floats, trailing newline.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))?;
    let mut text = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Schema(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn field_to_json(field: &HerglotzField) -> Result<String> {
    canonical_json(&field_to_record(field))
}

pub fn field_from_json(text: &str) -> Result<HerglotzField> {
    let record: FieldRecord =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("field file: {e}")))?;
    record_to_field(&record)
}

pub fn map_to_json(map: &PolyMap2) -> Result<String> {
    canonical_json(&map_to_record(map))
}

pub fn map_from_json(text: &str) -> Result<PolyMap2> {
    let record: MapRecord =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("map file: {e}")))?;
    record_to_map(&record)
}

/// CSV export of an evolution record: one row per grid time and stored
/// coefficient, with the raw and the rescaled value.
pub fn evolution_to_csv(record: &EvolutionRecord) -> String {
    let mut out = String::from("t,j,alpha1,alpha2,re_a,im_a,re_et_a,im_et_a\r\n");
    for i in 0..record.len() {
        let t = record.times()[i];
        let raw = record.coeffs_at(i);
        let scaled = record.rescaled_at(i);
        for j in [Component::One, Component::Two] {
            for (alpha, a) in raw.component(j).terms() {
                let s = scaled.component(j).coeff(alpha);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\r\n",
                    t,
                    j.index(),
                    alpha.a1,
                    alpha.a2,
                    a.re,
                    a.im,
                    s.re,
                    s.im
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{koebe_field, pure_power_field};
    use crate::loewner::{coeff_evolution, parametric_map};

    #[test]
    fn field_round_trip_is_byte_stable() {
        let field = koebe_field(8);
        let json = field_to_json(&field).unwrap();
        let parsed = field_from_json(&json).unwrap();
        assert_eq!(parsed, field);
        assert_eq!(field_to_json(&parsed).unwrap(), json);
    }

    #[test]
    fn map_round_trip_keeps_inexact_linear_parts() {
        // Computed maps carry linear coefficients a few ulps away from 1;
        // those must survive the round trip, not get snapped.
        let field = pure_power_field(2, 4).unwrap();
        let map = parametric_map(&field, 4, 16.0, 1e-3, 1e-2).unwrap();
        let json = map_to_json(&map).unwrap();
        let parsed = map_from_json(&json).unwrap();
        assert_eq!(parsed, map);
        assert_eq!(map_to_json(&parsed).unwrap(), json);
    }

    #[test]
    fn canonical_output_omits_the_implied_linear_part() {
        let json = field_to_json(&koebe_field(4)).unwrap();
        assert!(!json.contains("\"alpha\": [\n        1,\n        0\n      ]"));
        let record: FieldRecord = serde_json::from_str(&json).unwrap();
        assert!(record.pieces[0]
            .terms
            .iter()
            .all(|t| t.alpha[0] + t.alpha[1] >= 2));
    }

    #[test]
    fn parser_accepts_consistent_and_rejects_inconsistent_linear_terms() {
        let ok = r#"{"truncation_degree": 3, "pieces": [{"t_start": 0.0, "terms": [
            {"component": 1, "alpha": [1, 0], "re": -1.0, "im": 0.0},
            {"component": 1, "alpha": [2, 0], "re": -2.0, "im": 0.0}
        ]}]}"#;
        assert!(field_from_json(ok).is_ok());

        let bad = r#"{"truncation_degree": 3, "pieces": [{"t_start": 0.0, "terms": [
            {"component": 1, "alpha": [1, 0], "re": -2.0, "im": 0.0}
        ]}]}"#;
        assert!(matches!(field_from_json(bad), Err(Error::Schema(_))));
    }

    #[test]
    fn parser_rejects_malformed_terms() {
        let bad_component = r#"{"truncation_degree": 3, "pieces": [{"t_start": 0.0, "terms": [
            {"component": 3, "alpha": [2, 0], "re": 1.0, "im": 0.0}
        ]}]}"#;
        assert!(field_from_json(bad_component).is_err());

        let beyond = r#"{"truncation_degree": 3, "pieces": [{"t_start": 0.0, "terms": [
            {"component": 1, "alpha": [4, 0], "re": 1.0, "im": 0.0}
        ]}]}"#;
        assert!(field_from_json(beyond).is_err());

        let duplicate = r#"{"truncation_degree": 3, "pieces": [{"t_start": 0.0, "terms": [
            {"component": 1, "alpha": [2, 0], "re": 1.0, "im": 0.0},
            {"component": 1, "alpha": [2, 0], "re": 0.5, "im": 0.0}
        ]}]}"#;
        assert!(field_from_json(duplicate).is_err());

        let not_json = "{";
        assert!(field_from_json(not_json).is_err());
    }

    #[test]
    fn evolution_csv_shape() {
        let field = pure_power_field(2, 2).unwrap();
        let record = coeff_evolution(&field, 2, 0.0, 0.1, 0.05).unwrap();
        let csv = evolution_to_csv(&record);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,j,alpha1,alpha2,re_a,im_a,re_et_a,im_et_a"
        );
        // 3 grid nodes; the initial node has 2 stored terms, later ones 3.
        assert_eq!(csv.lines().count(), 1 + 2 + 3 + 3);
        for line in csv.lines().skip(1) {
            assert_eq!(line.split(',').count(), 8);
            let t: f64 = line.split(',').next().unwrap().parse().unwrap();
            assert!((0.0..=0.1).contains(&t));
        }
    }
}
