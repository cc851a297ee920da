//! Explicit finite classes: a label table over an indexed point set.
//! Realizability is a table scan, which makes this the ground-truth class
//! for cross-checking the structured implementations.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ConceptClass;
use crate::error::{Error, Result};
use crate::protocol::{Label, LabeledExample};

#[derive(Clone, Debug)]
pub struct FiniteClass {
    rows: Vec<Vec<Label>>,
    names: Option<Vec<String>>,
}

/// JSON shape: point names plus one row of +1/-1 per hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteClassSpec {
    pub points: Vec<String>,
    pub hypotheses: Vec<Vec<i8>>,
}

impl FiniteClass {
    pub fn from_rows(rows: Vec<Vec<Label>>) -> Result<Self> {
        Self::build(rows, None)
    }

    pub fn from_spec(spec: &FiniteClassSpec) -> Result<Self> {
        if spec.points.is_empty() {
            return Err(Error::Structure("finite class needs at least one point".into()));
        }
        let mut rows = Vec::with_capacity(spec.hypotheses.len());
        for h in &spec.hypotheses {
            if h.len() != spec.points.len() {
                return Err(Error::Structure(format!(
                    "hypothesis row has {} entries for {} points",
                    h.len(),
                    spec.points.len()
                )));
            }
            let row: Result<Vec<Label>> = h.iter().map(|&v| Label::from_i8(v)).collect();
            rows.push(row?);
        }
        Self::build(rows, Some(spec.points.clone()))
    }

    fn build(rows: Vec<Vec<Label>>, names: Option<Vec<String>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Structure("finite class needs at least one hypothesis".into()));
        }
        let width = rows[0].len();
        if width == 0 {
            return Err(Error::Structure("finite class needs at least one point".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Structure("hypothesis rows must all have the same length".into()));
        }
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert(r.clone()) {
                return Err(Error::Structure("duplicate hypothesis row".into()));
            }
        }
        Ok(FiniteClass { rows, names })
    }

    pub fn n_points(&self) -> usize {
        self.rows[0].len()
    }

    pub fn n_hypotheses(&self) -> usize {
        self.rows.len()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn hypothesis(&self, i: usize) -> &[Label] {
        &self.rows[i]
    }

    fn check_point(&self, p: usize) -> Result<()> {
        if p < self.n_points() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point index {p} out of range for {} points",
                self.n_points()
            )))
        }
    }
}

impl ConceptClass<usize> for FiniteClass {
    fn realizable(&self, examples: &[LabeledExample<usize>]) -> Result<bool> {
        for e in examples {
            self.check_point(e.point)?;
        }
        Ok(self
            .rows
            .iter()
            .any(|row| examples.iter().all(|e| row[e.point] == e.label)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::rectangle::tests::pt;
    use crate::classes::RectangleClass;

    fn ex(p: usize, label: Label) -> LabeledExample<usize> {
        LabeledExample::new(p, label)
    }

    #[test]
    fn table_scan_matches_hand_answers() {
        // Two threshold hypotheses on a line of three points.
        let rows = vec![
            vec![Label::Plus, Label::Minus, Label::Minus],
            vec![Label::Plus, Label::Plus, Label::Minus],
        ];
        let class = FiniteClass::from_rows(rows).unwrap();
        assert!(class.realizable(&[ex(0, Label::Plus), ex(2, Label::Minus)]).unwrap());
        assert!(!class.realizable(&[ex(0, Label::Minus)]).unwrap());
        assert!(!class
            .realizable(&[ex(1, Label::Plus), ex(0, Label::Minus)])
            .unwrap());
        assert_eq!(class.forced_label(&[], &0).unwrap(), Some(Label::Plus));
        assert_eq!(class.forced_label(&[], &1).unwrap(), None);
    }

    #[test]
    fn spec_loader_validates_shape() {
        let good: FiniteClassSpec = serde_json::from_str(
            r#"{"points": ["a", "b"], "hypotheses": [[1, -1], [-1, -1]]}"#,
        )
        .unwrap();
        let class = FiniteClass::from_spec(&good).unwrap();
        assert_eq!(class.n_points(), 2);
        assert_eq!(class.n_hypotheses(), 2);
        assert_eq!(class.names().unwrap()[1], "b");

        let ragged: FiniteClassSpec =
            serde_json::from_str(r#"{"points": ["a", "b"], "hypotheses": [[1]]}"#).unwrap();
        assert!(matches!(FiniteClass::from_spec(&ragged), Err(Error::Structure(_))));

        let dup: FiniteClassSpec = serde_json::from_str(
            r#"{"points": ["a"], "hypotheses": [[1], [1]]}"#,
        )
        .unwrap();
        assert!(matches!(FiniteClass::from_spec(&dup), Err(Error::Structure(_))));

        let bad_label: FiniteClassSpec =
            serde_json::from_str(r#"{"points": ["a"], "hypotheses": [[2]]}"#).unwrap();
        assert!(FiniteClass::from_spec(&bad_label).is_err());
    }

    #[test]
    fn out_of_range_point_is_a_domain_error() {
        let class = FiniteClass::from_rows(vec![vec![Label::Plus]]).unwrap();
        assert!(matches!(
            class.realizable(&[ex(3, Label::Plus)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tabulated_rectangle_class_agrees_with_structured_one() {
        // Points: the 3x3 grid {0,1,2}^2. Hypotheses: thresholds v in
        // {0,1,2}^2 (distinct rows guaranteed since every v labels itself
        // positive and larger grids negative).
        let grid: Vec<Vec<i64>> = (0..3)
            .flat_map(|x| (0..3).map(move |y| vec![x, y]))
            .collect();
        let rect = RectangleClass::new(2).unwrap();
        let mut rows = Vec::new();
        for vx in 0..3 {
            for vy in 0..3 {
                let v = pt(&[vx, vy]);
                let row: Vec<Label> = grid
                    .iter()
                    .map(|g| RectangleClass::label_of(&v, &pt(g)))
                    .collect();
                rows.push(row);
            }
        }
        let table = FiniteClass::from_rows(rows).unwrap();

        // Compare realizability on every labeled set of up to 3 distinct
        // grid points (labels enumerated per subset).
        let n = grid.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for mask in 0..8u32 {
                        let lab = |bit: u32| {
                            if mask >> bit & 1 == 1 {
                                Label::Plus
                            } else {
                                Label::Minus
                            }
                        };
                        let idx_set =
                            [ex(a, lab(0)), ex(b, lab(1)), ex(c, lab(2))];
                        let pts: Vec<_> = [a, b, c]
                            .iter()
                            .zip(0u32..)
                            .map(|(&i, bit)| LabeledExample::new(pt(&grid[i]), lab(bit)))
                            .collect();
                        assert_eq!(
                            table.realizable(&idx_set).unwrap(),
                            rect.realizable(&pts).unwrap(),
                            "points {:?} mask {mask}",
                            [a, b, c]
                        );
                    }
                }
            }
        }
    }
}
