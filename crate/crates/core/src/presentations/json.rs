use super::{GeneratorSpace, Kind, Mat, Presentation, PresentationError, Relation, TwoVertexTerm, VertexSpec};
use crate::exact_linalg::parse_rational;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPresentation {
    name: String,
    kind: String,
    generators: Vec<RawGenerator>,
    relations: Vec<RawRelation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    id: String,
    inputs: usize,
    outputs: usize,
    dim: usize,
    in_transpositions: Vec<Vec<String>>,
    out_transpositions: Vec<Vec<String>>,
    #[serde(default)]
    degree: i32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    name: String,
    terms: Vec<RawTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    coeff: String,
    lower: RawVertex,
    upper: RawVertex,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    gen: String,
    basis: usize,
    #[serde(rename = "in")]
    ins: Vec<usize>,
    #[serde(rename = "out")]
    outs: Vec<usize>,
}

fn syntax(msg: String) -> PresentationError {
    PresentationError::Syntax { line: 0, column: 0, msg }
}

fn matrix(flat: &[String], dim: usize, what: &str) -> Result<Mat, PresentationError> {
    if flat.len() != dim * dim {
        return Err(PresentationError::ArityMismatch(format!(
            "{what}: expected {} entries, found {}",
            dim * dim,
            flat.len()
        )));
    }
    let vals = flat
        .iter()
        .map(|s| parse_rational(s).map_err(|e| syntax(format!("{what}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vals.chunks(dim).map(|c| c.to_vec()).collect())
}

/// Parses and validates a presentation in the JSON exchange format.
pub fn parse(source: &str) -> Result<Presentation, PresentationError> {
    let raw: RawPresentation = serde_json::from_str(source).map_err(|e| PresentationError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let kind = match raw.kind.as_str() {
        "dioperad" => Kind::Dioperad,
        "properad-envelope" => Kind::PropEnvelope,
        other => return Err(syntax(format!("unknown kind {other:?}"))),
    };
    let mut generators = Vec::new();
    for g in &raw.generators {
        if generators.iter().any(|h: &GeneratorSpace| h.id == g.id) {
            return Err(PresentationError::ArityMismatch(format!("duplicate generator {}", g.id)));
        }
        let what = |side: &str, i: usize| format!("generator {} {side} transposition {}", g.id, i + 1);
        generators.push(GeneratorSpace {
            id: g.id.clone(),
            inputs: g.inputs,
            outputs: g.outputs,
            dim: g.dim,
            in_transpositions: g
                .in_transpositions
                .iter()
                .enumerate()
                .map(|(i, t)| matrix(t, g.dim, &what("input", i)))
                .collect::<Result<_, _>>()?,
            out_transpositions: g
                .out_transpositions
                .iter()
                .enumerate()
                .map(|(i, t)| matrix(t, g.dim, &what("output", i)))
                .collect::<Result<_, _>>()?,
            degree: g.degree,
        });
    }
    let gen_of = |id: &str, rel: &str| {
        generators
            .iter()
            .position(|g| g.id == id)
            .ok_or_else(|| PresentationError::ArityMismatch(format!("relation {rel}: undeclared generator {id:?}")))
    };
    let mut relations = Vec::new();
    for r in &raw.relations {
        let mut terms = Vec::new();
        for t in &r.terms {
            let vertex = |v: &RawVertex| -> Result<VertexSpec, PresentationError> {
                Ok(VertexSpec { gen: gen_of(&v.gen, &r.name)?, basis: v.basis, ins: v.ins.clone(), outs: v.outs.clone() })
            };
            terms.push(TwoVertexTerm {
                coeff: parse_rational(&t.coeff).map_err(|e| syntax(format!("relation {}: {e}", r.name)))?,
                lower: vertex(&t.lower)?,
                upper: vertex(&t.upper)?,
            });
        }
        relations.push(Relation { name: r.name.clone(), terms });
    }
    let p = Presentation { name: raw.name, kind, generators, relations };
    p.validate()?;
    Ok(p)
}

/// Serializes to the exchange format (pretty-printed, deterministic).
pub fn to_json(p: &Presentation) -> String {
    let flat = |m: &Mat| m.iter().flatten().map(|x| x.to_string()).collect::<Vec<_>>();
    let raw = RawPresentation {
        name: p.name.clone(),
        kind: match p.kind {
            Kind::Dioperad => "dioperad".into(),
            Kind::PropEnvelope => "properad-envelope".into(),
        },
        generators: p
            .generators
            .iter()
            .map(|g| RawGenerator {
                id: g.id.clone(),
                inputs: g.inputs,
                outputs: g.outputs,
                dim: g.dim,
                in_transpositions: g.in_transpositions.iter().map(flat).collect(),
                out_transpositions: g.out_transpositions.iter().map(flat).collect(),
                degree: g.degree,
            })
            .collect(),
        relations: p
            .relations
            .iter()
            .map(|r| RawRelation {
                name: r.name.clone(),
                terms: r
                    .terms
                    .iter()
                    .map(|t| {
                        let v = |s: &VertexSpec| RawVertex {
                            gen: p.generators[s.gen].id.clone(),
                            basis: s.basis,
                            ins: s.ins.clone(),
                            outs: s.outs.clone(),
                        };
                        RawTerm { coeff: t.coeff.to_string(), lower: v(&t.lower), upper: v(&t.upper) }
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
      "name": "tiny", "kind": "dioperad",
      "generators": [{"id": "m", "inputs": 2, "outputs": 1, "dim": 1,
                      "in_transpositions": [["1"]], "out_transpositions": [], "degree": 0}],
      "relations": [{"name": "assoc", "terms": [
        {"coeff": "1", "lower": {"gen": "m", "basis": 0, "in": [1, 2], "out": [0]},
                       "upper": {"gen": "m", "basis": 0, "in": [0, 3], "out": [1]}},
        {"coeff": "-1", "lower": {"gen": "m", "basis": 0, "in": [2, 3], "out": [0]},
                        "upper": {"gen": "m", "basis": 0, "in": [1, 0], "out": [1]}}]}]
    }"#;

    #[test]
    fn round_trip() {
        let p = parse(TINY).unwrap();
        assert_eq!(p.relations[0].terms.len(), 2);
        assert_eq!(parse(&to_json(&p)).unwrap(), p);
    }

    #[test]
    fn undeclared_generator() {
        let bad = TINY.replacen(r#""gen": "m", "basis": 0, "in": [2, 3]"#, r#""gen": "q", "basis": 0, "in": [2, 3]"#, 1);
        assert!(matches!(parse(&bad), Err(PresentationError::ArityMismatch(_))));
    }

    #[test]
    fn syntax_position() {
        let err = parse("{\n  \"name\": ,\n}").unwrap_err();
        match err {
            PresentationError::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn labels_must_cover() {
        let bad = TINY.replacen("[0, 3]", "[0, 4]", 1);
        assert!(matches!(parse(&bad), Err(PresentationError::ArityMismatch(_))));
    }

    #[test]
    fn bad_coxeter() {
        let bad = TINY.replacen(r#"[["1"]]"#, r#"[["2"]]"#, 1);
        assert!(matches!(parse(&bad), Err(PresentationError::NonGroupAction(_))));
    }
}
