use num_complex::Complex64;

use super::index::{Powers, Wave};
use super::series::FourierTaylor;

#[derive(Clone, Debug)]
struct Term {
    m: Powers,
    k: Wave,
    c: Complex64,
}

/// Several series flattened for repeated real evaluation at the same
/// points. Only one index of each `±k` pair is kept (doubled), and the
/// exponentials `e^{i n q_j}` are tabulated once per point.
#[derive(Clone, Debug)]
pub struct Evaluator {
    n: usize,
    series: Vec<Vec<Term>>,
    kmax: Vec<usize>,
}

impl Evaluator {
    pub fn new(series: &[FourierTaylor]) -> Self {
        let n = series.first().map_or(0, FourierTaylor::n);
        let mut kmax = vec![0usize; n];
        let compiled = series
            .iter()
            .map(|s| {
                assert_eq!(s.n(), n, "evaluator series must share the dimension");
                s.iter()
                    .filter(|(idx, _)| idx.is_average() || idx.is_positive_wave())
                    .map(|(idx, c)| {
                        for j in 0..n {
                            kmax[j] = kmax[j].max(idx.k[j].unsigned_abs() as usize);
                        }
                        let c = if idx.is_average() {
                            Complex64::new(c.re, 0.0)
                        } else {
                            c * 2.0
                        };
                        Term {
                            m: idx.m.clone(),
                            k: idx.k.clone(),
                            c,
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            series: compiled,
            kmax,
        }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Writes the real value of every series at `(p, q)` into `out`.
    pub fn eval_into(&self, p: &[f64], q: &[f64], out: &mut [f64]) {
        let n = self.n;
        let table: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                (0..=self.kmax[j])
                    .map(|v| {
                        let (s, c) = (v as f64 * q[j]).sin_cos();
                        Complex64::new(c, s)
                    })
                    .collect()
            })
            .collect();
        for (slot, terms) in out.iter_mut().zip(&self.series) {
            let mut acc = 0.0;
            for t in terms {
                let mut z = t.c;
                for j in 0..n {
                    let e = t.m[j];
                    if e != 0 {
                        z *= p[j].powi(i32::from(e));
                    }
                    let kj = t.k[j];
                    if kj > 0 {
                        z *= table[j][kj as usize];
                    } else if kj < 0 {
                        z *= table[j][kj.unsigned_abs() as usize].conj();
                    }
                }
                acc += z.re;
            }
            *slot = acc;
        }
    }

    pub fn eval(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.series.len()];
        self.eval_into(p, q, &mut out);
        out
    }
}
