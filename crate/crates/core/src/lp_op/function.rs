use serde::{Deserialize, Serialize};

use crate::space::{MetricSpace, Subset};

/// Real-valued bounded function on X, acting block-diagonally by multiplication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScalarFunction {
    values: Vec<f64>,
}

impl ScalarFunction {
    pub fn new(values: Vec<f64>) -> Self {
        ScalarFunction { values }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        ScalarFunction { values: vec![c; n] }
    }

    /// Characteristic function of `a`.
    pub fn indicator(n: usize, a: &Subset) -> Self {
        let mut values = vec![0.0; n];
        for x in a.iter() {
            values[x] = 1.0;
        }
        ScalarFunction { values }
    }

    /// Tent `clamp_[0,1](1 − L·d(x, S))`, which is `L`-Lipschitz and equal to 1 on `S`.
    pub fn tent(space: &MetricSpace, set: &Subset, lipschitz: f64) -> Self {
        let values = (0..space.len())
            .map(|x| {
                if set.contains(x) {
                    1.0
                } else {
                    (1.0 - lipschitz * space.point_set_distance(x, set)).clamp(0.0, 1.0)
                }
            })
            .collect();
        ScalarFunction { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Subset {
        Subset::new((0..self.values.len()).filter(|&x| self.values[x] != 0.0).collect())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `max_{x≠y} |f(x) − f(y)| / d(x,y)`, by exhaustive pair scan.
    pub fn lipschitz_constant(&self, space: &MetricSpace) -> f64 {
        let n = self.values.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                let diff = (self.values[x] - self.values[y]).abs();
                if diff > 0.0 {
                    best = best.max(diff / space.dist(x, y));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceSpec;

    #[test]
    fn tent_shape() {
        let s = MetricSpace::build(&SpaceSpec::Path { n: 8 }).unwrap();
        let f = ScalarFunction::tent(&s, &Subset::singleton(2), 0.25);
        assert_eq!(f.values(), &[0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0, 0.0]);
        assert_eq!(f.lipschitz_constant(&s), 0.25);
        assert_eq!(f.support(), Subset::new((0..6).collect()));
        assert_eq!(ScalarFunction::constant(8, 0.3).lipschitz_constant(&s), 0.0);
    }
}
