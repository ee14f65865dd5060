use std::fmt;

use crate::bivar::Bivar;
use crate::scalar::{fmt_rational, Rational, Scalar};

/// Segment of the lower convex hull of `{(j, ord_x p_j)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Rise over run.
    pub slope: Rational,
    pub from: (i64, i64),
    pub to: (i64, i64),
    /// Horizontal length: the number of roots `y` of order `-slope`.
    pub length: i64,
}

impl Edge {
    /// Order in `x` of the roots attached to this edge.
    pub fn exponent(&self) -> Rational {
        -self.slope.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub edges: Vec<Edge>,
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.edges.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(
                f,
                "({}, {})-({}, {}) slope {}",
                e.from.0,
                e.from.1,
                e.to.0,
                e.to.1,
                fmt_rational(&e.slope)
            )?;
        }
        Ok(())
    }
}

/// Lower convex hull of points sorted by strictly increasing abscissa.
pub fn lower_hull(points: &[(i64, i64)]) -> Vec<Edge> {
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b unless it lies strictly below the segment a-p
            let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| Edge {
            slope: Rational::new((w[1].1 - w[0].1).into(), (w[1].0 - w[0].0).into()),
            from: w[0],
            to: w[1],
            length: w[1].0 - w[0].0,
        })
        .collect()
}

/// Newton polygon of `P` as a polynomial in `y` over `Q((x))`.
pub fn newton_polygon<C: Scalar>(p: &Bivar<C>) -> NewtonPolygon {
    NewtonPolygon {
        edges: lower_hull(&p.newton_points()),
    }
}
