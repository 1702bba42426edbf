//! JSON form `{ "n": int, "terms": [ { "m": [..], "k": [..], "re": f, "im": f } ] }`.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::index::MultiIndex;
use super::series::FourierTaylor;

#[derive(Serialize, Deserialize)]
struct TermRepr {
    m: Vec<u16>,
    k: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    n: usize,
    terms: Vec<TermRepr>,
}

impl Serialize for FourierTaylor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let terms = self
            .iter()
            .map(|(idx, c)| TermRepr {
                m: idx.m.to_vec(),
                k: idx.k.to_vec(),
                re: c.re,
                im: c.im,
            })
            .collect();
        SeriesRepr { n: self.n(), terms }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FourierTaylor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = SeriesRepr::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(repr.terms.len());
        for (i, t) in repr.terms.into_iter().enumerate() {
            if t.m.len() != repr.n || t.k.len() != repr.n {
                return Err(D::Error::custom(format!(
                    "term {i}: m and k must both have length n = {}",
                    repr.n
                )));
            }
            terms.push((MultiIndex::new(&t.m, &t.k), Complex64::new(t.re, t.im)));
        }
        FourierTaylor::from_terms(repr.n, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_shape() {
        let f = FourierTaylor::cos(&[1, -1], 0.5);
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["terms"].as_array().unwrap().len(), 2);
        assert_eq!(v["terms"][0]["k"], serde_json::json!([-1, 1]));
        assert_eq!(v["terms"][0]["re"], 0.25);
    }

    #[test]
    fn malformed_terms_are_rejected() {
        let bad = r#"{"n": 2, "terms": [{"m": [0], "k": [1, 0], "re": 1.0, "im": 0.0}]}"#;
        assert!(serde_json::from_str::<FourierTaylor>(bad).is_err());
        let lone = r#"{"n": 1, "terms": [{"m": [0], "k": [1], "re": 1.0, "im": 0.0}]}"#;
        let err = serde_json::from_str::<FourierTaylor>(lone).unwrap_err();
        assert!(err.to_string().contains("conjugate"));
    }
}
