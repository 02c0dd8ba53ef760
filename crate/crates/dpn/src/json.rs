//! Bit-exact JSON serialization for elements, descents, and Frobenius
//! parameter matrices / image tables.
//!
//! Element format:
//!
//! ```json
//! {"p":2,"n":1,"terms":[{"x":[0],"d":[0],"c":1},{"x":[1],"d":[1],"c":1}]}
//! ```
//!
//! Terms are emitted in the canonical deterministic order (lexicographic
//! in (x, d)); on input they may appear in any order, but duplicate
//! (x, d) keys, zero coefficients, coefficients outside [1, p), and
//! exponent vectors of the wrong length are rejected rather than
//! repaired. Round-tripping is the identity, byte for byte on the
//! serialized side.
//!
//! The aggregate formats reuse the term encoding:
//!
//! * parameter matrix: `{"p","n","s","u":[[{"terms":[…]},…],…]}` with
//!   one row per axis and one column per depth level;
//! * generator image table: `{"p","n","s","images":[[{"terms":[…]},…]]}`;
//! * descent (generator form): `{"p","n","level","bounds","gens":[[…]]}`;
//! * descent table: `{"p","n","level","bounds","table":[{"alpha":[…],"terms":[…]}]}`.

use crate::descent::{Descent, DescentTable};
use crate::error::Error;
use crate::field::Prime;
use crate::frobenius::{FrobMap, FrobParams};
use crate::index::MultiIndex;
use crate::ring::DiffOp;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub x: Vec<u32>,
    pub d: Vec<u32>,
    pub c: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementJson {
    pub p: u64,
    pub n: usize,
    pub terms: Vec<TermJson>,
}

/// A bare element (no p/n header), used inside aggregate formats.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamsJson {
    pub p: u64,
    pub n: usize,
    pub s: u32,
    pub u: Vec<Vec<EntryJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ImageTableJson {
    pub p: u64,
    pub n: usize,
    pub s: u32,
    pub images: Vec<Vec<EntryJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescentJson {
    pub p: u64,
    pub n: usize,
    pub level: u32,
    pub bounds: Vec<u32>,
    pub gens: Vec<Vec<EntryJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntryJson {
    pub alpha: Vec<u32>,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescentTableJson {
    pub p: u64,
    pub n: usize,
    pub level: u32,
    pub bounds: Vec<u32>,
    pub table: Vec<TableEntryJson>,
}

fn terms_of(a: &DiffOp) -> Vec<TermJson> {
    a.terms()
        .map(|((alpha, beta), c)| TermJson {
            x: alpha.entries().to_vec(),
            d: beta.entries().to_vec(),
            c: c.value(),
        })
        .collect()
}

fn terms_to_op(p: Prime, n: usize, terms: &[TermJson]) -> Result<DiffOp, Error> {
    let mut keys: BTreeMap<(MultiIndex, MultiIndex), u64> = BTreeMap::new();
    for t in terms {
        if t.x.len() != n || t.d.len() != n {
            return Err(Error::Json(format!(
                "term exponent vectors must have length {n}, got x: {}, d: {}",
                t.x.len(),
                t.d.len()
            )));
        }
        if t.c == 0 {
            return Err(Error::Json("zero coefficient".into()));
        }
        if t.c >= p.get() {
            return Err(Error::Json(format!(
                "coefficient {} is not reduced modulo {}",
                t.c,
                p.get()
            )));
        }
        let key = (MultiIndex::new(t.x.clone()), MultiIndex::new(t.d.clone()));
        if keys.insert(key, t.c).is_some() {
            return Err(Error::Json(format!(
                "duplicate term at x = {:?}, d = {:?}",
                t.x, t.d
            )));
        }
    }
    let mut out = DiffOp::zero(p, n);
    for ((alpha, beta), c) in keys {
        out = &out + &DiffOp::monomial(p, n, &alpha, &beta, c);
    }
    Ok(out)
}

fn header(p: u64, n: usize) -> Result<Prime, Error> {
    if n == 0 {
        return Err(Error::Json("n must be at least 1".into()));
    }
    Prime::new(p)
}

pub fn element_to_json(a: &DiffOp) -> ElementJson {
    ElementJson {
        p: a.p().get(),
        n: a.n(),
        terms: terms_of(a),
    }
}

pub fn element_from_json(e: &ElementJson) -> Result<DiffOp, Error> {
    let p = header(e.p, e.n)?;
    terms_to_op(p, e.n, &e.terms)
}

/// Serialize an element to the canonical single-line JSON string.
pub fn element_to_string(a: &DiffOp) -> String {
    serde_json::to_string(&element_to_json(a)).expect("serialization cannot fail")
}

/// Parse an element from JSON text.
pub fn element_from_str(text: &str) -> Result<DiffOp, Error> {
    element_from_json(&serde_json::from_str(text)?)
}

/// Encode a grid of elements (no p/n header) for embedding in larger
/// documents.
pub fn grid_to_json(entries: &[Vec<DiffOp>]) -> Vec<Vec<EntryJson>> {
    entries
        .iter()
        .map(|row| row.iter().map(|a| EntryJson { terms: terms_of(a) }).collect())
        .collect()
}

fn grid_to_ops(
    p: Prime,
    n: usize,
    grid: &[Vec<EntryJson>],
) -> Result<Vec<Vec<DiffOp>>, Error> {
    grid.iter()
        .map(|row| {
            row.iter()
                .map(|e| terms_to_op(p, n, &e.terms))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect()
}

pub fn params_to_json(params: &FrobParams) -> ParamsJson {
    ParamsJson {
        p: params.p().get(),
        n: params.n(),
        s: params.s(),
        u: grid_to_json(params.entries()),
    }
}

pub fn params_from_json(j: &ParamsJson) -> Result<FrobParams, Error> {
    let p = header(j.p, j.n)?;
    FrobParams::new(p, j.n, j.s, grid_to_ops(p, j.n, &j.u)?)
}

pub fn params_to_string(params: &FrobParams) -> String {
    serde_json::to_string(&params_to_json(params)).expect("serialization cannot fail")
}

pub fn params_from_str(text: &str) -> Result<FrobParams, Error> {
    params_from_json(&serde_json::from_str(text)?)
}

/// Serialize a map's generator images down to the given depth.
pub fn image_table_to_json(map: &FrobMap, depth: u32) -> Result<ImageTableJson, Error> {
    Ok(ImageTableJson {
        p: map.p().get(),
        n: map.n(),
        s: map.s(),
        images: grid_to_json(&map.image_table(depth)?),
    })
}

/// Rebuild a raw (fixed-depth, parameter-free) map from an image table.
pub fn image_table_from_json(j: &ImageTableJson) -> Result<FrobMap, Error> {
    let p = header(j.p, j.n)?;
    FrobMap::from_images(p, j.n, j.s, grid_to_ops(p, j.n, &j.images)?)
}

pub fn image_table_to_string(map: &FrobMap, depth: u32) -> Result<String, Error> {
    Ok(serde_json::to_string(&image_table_to_json(map, depth)?)
        .expect("serialization cannot fail"))
}

pub fn image_table_from_str(text: &str) -> Result<FrobMap, Error> {
    image_table_from_json(&serde_json::from_str(text)?)
}

pub fn descent_to_json(d: &Descent) -> DescentJson {
    DescentJson {
        p: d.p().get(),
        n: d.n(),
        level: d.level(),
        bounds: d.bounds().to_vec(),
        gens: grid_to_json(d.gens()),
    }
}

pub fn descent_from_json(j: &DescentJson) -> Result<Descent, Error> {
    let p = header(j.p, j.n)?;
    let gens = grid_to_ops(p, j.n, &j.gens)?;
    for (i, (row, &b)) in gens.iter().zip(&j.bounds).enumerate() {
        if row.len() != b as usize {
            return Err(Error::Json(format!(
                "axis {} declares bound {} but carries {} generators",
                i + 1,
                b,
                row.len()
            )));
        }
    }
    Descent::new(p, j.n, j.level, gens)
}

pub fn descent_to_string(d: &Descent) -> String {
    serde_json::to_string(&descent_to_json(d)).expect("serialization cannot fail")
}

pub fn descent_from_str(text: &str) -> Result<Descent, Error> {
    descent_from_json(&serde_json::from_str(text)?)
}

pub fn table_to_json(t: &DescentTable) -> DescentTableJson {
    DescentTableJson {
        p: t.p().get(),
        n: t.n(),
        level: t.level(),
        bounds: t.bounds().to_vec(),
        table: t
            .entries()
            .map(|(alpha, a)| TableEntryJson {
                alpha: alpha.entries().to_vec(),
                terms: terms_of(a),
            })
            .collect(),
    }
}

pub fn table_from_json(j: &DescentTableJson) -> Result<DescentTable, Error> {
    let p = header(j.p, j.n)?;
    let mut table = BTreeMap::new();
    for entry in &j.table {
        if entry.alpha.len() != j.n {
            return Err(Error::Json(format!(
                "table key must have length {}, got {}",
                j.n,
                entry.alpha.len()
            )));
        }
        let key = MultiIndex::new(entry.alpha.clone());
        let value = terms_to_op(p, j.n, &entry.terms)?;
        if table.insert(key, value).is_some() {
            return Err(Error::Json(format!(
                "duplicate table key {:?}",
                entry.alpha
            )));
        }
    }
    DescentTable::new(p, j.n, j.level, j.bounds.clone(), table)
}

pub fn table_to_string(t: &DescentTable) -> String {
    serde_json::to_string(&table_to_json(t)).expect("serialization cannot fail")
}

pub fn table_from_str(text: &str) -> Result<DescentTable, Error> {
    table_from_json(&serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn pr(p: u64) -> Prime {
        Prime::new(p).unwrap()
    }

    #[test]
    fn frozen_element_encoding() {
        let p = pr(2);
        let a = &DiffOp::var(p, 1, 0).mul(&DiffOp::dpow(p, 1, 0, 1)) + &DiffOp::one(p, 1);
        assert_eq!(
            element_to_string(&a),
            r#"{"p":2,"n":1,"terms":[{"x":[0],"d":[0],"c":1},{"x":[1],"d":[1],"c":1}]}"#
        );
        assert_eq!(element_from_str(&element_to_string(&a)).unwrap(), a);
    }

    #[test]
    fn round_trip_random_elements() {
        let mut rng = sample::rng_from_seed(7);
        for p in [pr(2), pr(5)] {
            for _ in 0..30 {
                let a = sample::random_diffop(p, 2, 6, 6, 4, &mut rng);
                let text = element_to_string(&a);
                let back = element_from_str(&text).unwrap();
                assert_eq!(back, a);
                assert_eq!(element_to_string(&back), text);
            }
        }
        // Zero element: empty term list.
        let z = DiffOp::zero(pr(3), 2);
        assert_eq!(element_to_string(&z), r#"{"p":3,"n":2,"terms":[]}"#);
        assert!(element_from_str(&element_to_string(&z)).unwrap().is_zero());
    }

    #[test]
    fn input_is_order_free_but_strict() {
        let ok = element_from_str(
            r#"{"p":2,"n":1,"terms":[{"x":[1],"d":[1],"c":1},{"x":[0],"d":[0],"c":1}]}"#,
        )
        .unwrap();
        assert_eq!(ok.terms().count(), 2);

        let zero_c = element_from_str(r#"{"p":2,"n":1,"terms":[{"x":[0],"d":[0],"c":0}]}"#);
        assert!(matches!(zero_c, Err(Error::Json(m)) if m.contains("zero coefficient")));

        let big_c = element_from_str(r#"{"p":2,"n":1,"terms":[{"x":[0],"d":[0],"c":2}]}"#);
        assert!(matches!(big_c, Err(Error::Json(m)) if m.contains("not reduced")));

        let dup = element_from_str(
            r#"{"p":3,"n":1,"terms":[{"x":[1],"d":[0],"c":1},{"x":[1],"d":[0],"c":2}]}"#,
        );
        assert!(matches!(dup, Err(Error::Json(m)) if m.contains("duplicate")));

        let short = element_from_str(r#"{"p":2,"n":2,"terms":[{"x":[1],"d":[0,0],"c":1}]}"#);
        assert!(matches!(short, Err(Error::Json(m)) if m.contains("length")));

        let not_prime = element_from_str(r#"{"p":4,"n":1,"terms":[]}"#);
        assert!(matches!(not_prime, Err(Error::NotPrime(4))));

        let malformed = element_from_str("{");
        assert!(matches!(malformed, Err(Error::Json(_))));
    }

    #[test]
    fn params_round_trip() {
        let p = pr(3);
        let u0 = DiffOp::dpow(p, 1, 0, 1);
        let params = FrobParams::new(p, 1, 1, vec![vec![u0]]).unwrap();
        let text = params_to_string(&params);
        assert_eq!(
            text,
            r#"{"p":3,"n":1,"s":1,"u":[[{"terms":[{"x":[0],"d":[1],"c":1}]}]]}"#
        );
        let back = params_from_str(&text).unwrap();
        assert_eq!(params_to_string(&back), text);

        // Inadmissible entries are rejected by the params validator.
        let bad = params_from_str(
            r#"{"p":3,"n":1,"s":1,"u":[[{"terms":[{"x":[1],"d":[0],"c":1}]}]]}"#,
        );
        assert!(matches!(bad, Err(Error::BadParameter { .. })));
    }

    #[test]
    fn image_table_round_trip() {
        let p = pr(2);
        let map = FrobMap::canonical(p, 2, 1);
        let text = image_table_to_string(&map, 2).unwrap();
        let back = image_table_from_str(&text).unwrap();
        assert_eq!(image_table_to_string(&back, 2).unwrap(), text);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(
                    back.generator_image(i, k).unwrap(),
                    map.generator_image(i, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn descent_and_table_round_trip() {
        let p = pr(2);
        let d = crate::descent::Descent::canonical(p, 2, 0, &[2, 1]);
        let text = descent_to_string(&d);
        let back = descent_from_str(&text).unwrap();
        assert_eq!(back, d);

        let t = d.to_table();
        let ttext = table_to_string(&t);
        let tback = table_from_str(&ttext).unwrap();
        assert_eq!(table_to_string(&tback), ttext);
        assert_eq!(tback, t);

        // Bound/generator mismatch is rejected.
        let bad = descent_from_str(
            r#"{"p":2,"n":1,"level":0,"bounds":[2],"gens":[[{"terms":[{"x":[0],"d":[1],"c":1}]}]]}"#,
        );
        assert!(bad.is_err());
    }
}
