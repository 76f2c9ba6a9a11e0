//! JSON and CSV input.
//!
//! Inputs are parsed by hand from `serde_json::Value` because a point's
//! meaning depends on the space it lives in (an integer is an index in a
//! finite space and a real elsewhere). Errors carry a JSON pointer to the
//! offending field.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::families::{
    counterexample_family, dirac_points_family, dirac_sequence_family, spike_family, Certificates,
    ConstantDistance, DiracSequence, MassOutside, MeasureFamily, TailValue, UniformBound,
};
use crate::lipschitz::{LipschitzFn, Table, TruncationPart, LIPSCHITZ_TOL};
use crate::measure::DiscreteMeasure;
use crate::space::{MetricSpace, Point, PwlFn};

fn at(ptr: &str, key: impl std::fmt::Display) -> String {
    format!("{ptr}/{key}")
}

fn field<'a>(v: &'a Value, ptr: &str, key: &str) -> Result<&'a Value> {
    v.as_object()
        .ok_or_else(|| Error::schema(ptr, "expected an object"))?
        .get(key)
        .ok_or_else(|| Error::schema(at(ptr, key), "missing field"))
}

fn opt_field<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn num(v: &Value, ptr: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::schema(ptr, "number out of range")),
        Value::String(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(Error::schema(ptr, "expected a number")),
        },
        _ => Err(Error::schema(ptr, "expected a number")),
    }
}

fn num_field(v: &Value, ptr: &str, key: &str) -> Result<f64> {
    num(field(v, ptr, key)?, &at(ptr, key))
}

fn uint(v: &Value, ptr: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::schema(ptr, "expected a nonnegative integer"))
}

fn str_field<'a>(v: &'a Value, ptr: &str, key: &str) -> Result<&'a str> {
    field(v, ptr, key)?
        .as_str()
        .ok_or_else(|| Error::schema(at(ptr, key), "expected a string"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::schema(ptr, "expected an array"))
}

fn numbers(v: &Value, ptr: &str) -> Result<Vec<f64>> {
    array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| num(x, &at(ptr, i)))
        .collect()
}

/// Re-tags an error from a constructor with the location it came from.
fn located<T>(r: Result<T>, ptr: &str) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema { .. }
        | Error::File { .. }
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => e,
        other => Error::schema(ptr, other.to_string()),
    })
}

pub fn parse_space(v: &Value, ptr: &str) -> Result<MetricSpace> {
    let kind = str_field(v, ptr, "kind")?;
    let space = match kind {
        "real_line" => MetricSpace::RealLine,
        "c01_sup" => MetricSpace::C01Sup,
        "euclidean" => {
            let dim = uint(field(v, ptr, "dim")?, &at(ptr, "dim"))?;
            let p = match opt_field(v, "p") {
                Some(p) => num(p, &at(ptr, "p"))?,
                None => 2.0,
            };
            located(MetricSpace::euclidean(dim, p), ptr)?
        }
        "finite" => {
            let mptr = at(ptr, "matrix");
            let rows = array(field(v, ptr, "matrix")?, &mptr)?
                .iter()
                .enumerate()
                .map(|(i, r)| numbers(r, &at(&mptr, i)))
                .collect::<Result<Vec<_>>>()?;
            located(MetricSpace::finite(rows), &mptr)?
        }
        other => {
            return Err(Error::schema(
                at(ptr, "kind"),
                format!("unknown space kind '{other}'"),
            ))
        }
    };
    Ok(space)
}

pub fn space_to_json(space: &MetricSpace) -> Value {
    serde_json::to_value(space).expect("space serializes")
}

pub fn parse_point(space: &MetricSpace, v: &Value, ptr: &str) -> Result<Point> {
    let p = match (space, v) {
        (MetricSpace::Finite(_), Value::Number(_)) => Point::Index(uint(v, ptr)?),
        (MetricSpace::RealLine, _) => Point::Real(num(v, ptr)?),
        (MetricSpace::Euclidean { .. }, Value::Array(_)) => Point::Vector(numbers(v, ptr)?),
        (MetricSpace::C01Sup, Value::Object(_)) => {
            let t = numbers(field(v, ptr, "t")?, &at(ptr, "t"))?;
            let vals = numbers(field(v, ptr, "v")?, &at(ptr, "v"))?;
            Point::Pwl(located(PwlFn::new(t, vals), ptr)?)
        }
        _ => {
            return Err(Error::schema(
                ptr,
                format!(
                    "value does not describe a point of a {} space",
                    space.kind_name()
                ),
            ))
        }
    };
    located(space.check_point(&p), ptr)?;
    Ok(p)
}

pub fn parse_points(space: &MetricSpace, v: &Value, ptr: &str) -> Result<Vec<Point>> {
    array(v, ptr)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_point(space, x, &at(ptr, i)))
        .collect()
}

/// A measure object; its `space` field may be omitted when `default_space`
/// is given, and must then agree with it when present.
pub fn parse_measure(
    v: &Value,
    ptr: &str,
    default_space: Option<&Arc<MetricSpace>>,
) -> Result<DiscreteMeasure> {
    let space = match (opt_field(v, "space"), default_space) {
        (Some(s), Some(d)) => {
            let s = parse_space(s, &at(ptr, "space"))?;
            if s != **d {
                return Err(Error::schema(
                    at(ptr, "space"),
                    "space differs from the enclosing space",
                ));
            }
            d.clone()
        }
        (Some(s), None) => Arc::new(parse_space(s, &at(ptr, "space"))?),
        (None, Some(d)) => d.clone(),
        (None, None) => return Err(Error::schema(at(ptr, "space"), "missing field")),
    };
    let support = parse_points(&space, field(v, ptr, "support")?, &at(ptr, "support"))?;
    let weights = match opt_field(v, "weights") {
        Some(w) => numbers(w, &at(ptr, "weights"))?,
        None => vec![1.0 / support.len().max(1) as f64; support.len()],
    };
    let renormalize = match opt_field(v, "renormalize") {
        Some(r) => r
            .as_bool()
            .ok_or_else(|| Error::schema(at(ptr, "renormalize"), "expected a boolean"))?,
        None => opt_field(v, "weights").is_none(),
    };
    located(
        DiscreteMeasure::new(space, support, weights, renormalize),
        &at(ptr, "weights"),
    )
}

pub fn measure_to_json(p: &DiscreteMeasure) -> Value {
    serde_json::to_value(p).expect("measure serializes")
}

/// CSV sample: one column is a real, several columns a Euclidean vector.
pub fn read_csv_measure(path: &Path, space: Option<Arc<MetricSpace>>) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let space = match space {
        Some(s) => s,
        None => {
            let first = text
                .lines()
                .find(|l| {
                    !l.trim().is_empty() && l.split(',').all(|c| c.trim().parse::<f64>().is_ok())
                })
                .ok_or_else(|| Error::schema("", "csv file has no numeric rows"))?;
            let cols = first.split(',').count();
            Arc::new(if cols == 1 {
                MetricSpace::RealLine
            } else {
                MetricSpace::euclidean(cols, 2.0)?
            })
        }
    };
    let has_headers = text
        .lines()
        .next()
        .map(|l| l.split(',').any(|c| c.trim().parse::<f64>().is_err()))
        .unwrap_or(false);
    DiscreteMeasure::from_csv(space, text.as_bytes(), has_headers)
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::schema("", format!("{}: {e}", path.display())))
}

/// A measure from a `.json` or `.csv` file.
pub fn read_measure(
    path: &Path,
    default_space: Option<&Arc<MetricSpace>>,
) -> Result<DiscreteMeasure> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        return read_csv_measure(path, default_space.cloned());
    }
    parse_measure(&read_json(path)?, "", default_space)
}

/// A list of measures, either a JSON array or `{"centers": [...]}`.
pub fn parse_measure_list(
    v: &Value,
    ptr: &str,
    space: &Arc<MetricSpace>,
    base: &Path,
) -> Result<Vec<DiscreteMeasure>> {
    let (list, lptr) = match v.get("centers") {
        Some(c) => (c, at(ptr, "centers")),
        None => (v, ptr.to_string()),
    };
    array(list, &lptr)?
        .iter()
        .enumerate()
        .map(|(i, m)| measure_entry(m, &at(&lptr, i), space, base))
        .collect()
}

fn measure_entry(
    v: &Value,
    ptr: &str,
    space: &Arc<MetricSpace>,
    base: &Path,
) -> Result<DiscreteMeasure> {
    match v {
        Value::String(rel) => {
            let path = resolve(base, rel);
            read_measure(&path, Some(space))
                .map_err(|e| Error::schema(ptr, format!("{}: {e}", path.display())))
        }
        _ => parse_measure(v, ptr, Some(space)),
    }
}

fn resolve(base: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parse_certificates(v: &Value, ptr: &str, space: &Arc<MetricSpace>) -> Result<Certificates> {
    let mut c = Certificates::default();
    let obj = v
        .as_object()
        .ok_or_else(|| Error::schema(ptr, "expected an object"))?;
    for (key, val) in obj {
        let kptr = at(ptr, key);
        match key.as_str() {
            "infinite" => {
                c.infinite = val
                    .as_bool()
                    .ok_or_else(|| Error::schema(&kptr, "expected a boolean"))?;
            }
            "pairwise_separation" => c.pairwise_separation = Some(num(val, &kptr)?),
            "uniform_bound" => {
                c.uniform_bound = Some(UniformBound {
                    center: parse_point(space, field(val, &kptr, "center")?, &at(&kptr, "center"))?,
                    radius: num_field(val, &kptr, "radius")?,
                    attained: opt_field(val, "attained")
                        .and_then(Value::as_bool)
                        .unwrap_or(false),
                })
            }
            "constant_distance_to" => {
                c.constant_distance_to = Some(ConstantDistance {
                    measure: parse_measure(
                        field(val, &kptr, "measure")?,
                        &at(&kptr, "measure"),
                        Some(space),
                    )?,
                    value: num_field(val, &kptr, "value")?,
                })
            }
            "tail_value" => {
                c.tail_value = Some(TailValue {
                    center: parse_point(space, field(val, &kptr, "center")?, &at(&kptr, "center"))?,
                    value: num_field(val, &kptr, "value")?,
                    from_radius: num_field(val, &kptr, "from_radius")?,
                })
            }
            "mass_outside" => {
                c.mass_outside = Some(MassOutside {
                    center: parse_point(space, field(val, &kptr, "center")?, &at(&kptr, "center"))?,
                    mass_coeff: num_field(val, &kptr, "mass_coeff")?,
                    mass_exp: num_field(val, &kptr, "mass_exp")?,
                    dist_coeff: num_field(val, &kptr, "dist_coeff")?,
                    dist_exp: num_field(val, &kptr, "dist_exp")?,
                    core_radius: num_field(val, &kptr, "core_radius")?,
                })
            }
            other => {
                return Err(Error::schema(
                    kptr,
                    format!("unknown certificate '{other}'"),
                ))
            }
        }
    }
    Ok(c)
}

fn horizon_of(v: &Value, ptr: &str, default: usize) -> Result<usize> {
    match opt_field(v, "horizon") {
        Some(h) => uint(h, &at(ptr, "horizon")),
        None => Ok(default),
    }
}

/// Default horizon for built-in families when the descriptor gives none.
pub const DEFAULT_HORIZON: usize = 100;

/// A family descriptor. Relative member paths resolve against `base`.
pub fn parse_family(v: &Value, base: &Path) -> Result<MeasureFamily> {
    if let Some(b) = opt_field(v, "builtin") {
        let name = b
            .as_str()
            .ok_or_else(|| Error::schema("/builtin", "expected a string"))?;
        let horizon = horizon_of(v, "", DEFAULT_HORIZON)?;
        return located(
            match name {
                "counterexample" => {
                    let m = num(
                        v.get("M")
                            .or_else(|| v.get("m"))
                            .ok_or_else(|| Error::schema("/M", "missing field"))?,
                        "/M",
                    )?;
                    counterexample_family(m, horizon)
                }
                "spike" => spike_family(horizon),
                "dirac_sequence" => dirac_sequence_family(parse_sequence(v)?, horizon),
                other => {
                    return Err(Error::schema(
                        "/builtin",
                        format!("unknown builtin family '{other}'"),
                    ))
                }
            },
            "",
        );
    }
    if let Some(points) = opt_field(v, "points") {
        let space = Arc::new(parse_space(field(v, "", "space")?, "/space")?);
        let pts = parse_points(&space, points, "/points")?;
        let certs = match opt_field(v, "certificates") {
            Some(c) => parse_certificates(c, "/certificates", &space)?,
            None => Certificates::default(),
        };
        return located(dirac_points_family(space, pts, certs), "/points");
    }
    let members_v = array(field(v, "", "members")?, "/members")?;
    let space = match opt_field(v, "space") {
        Some(s) => Some(Arc::new(parse_space(s, "/space")?)),
        None => None,
    };
    let mut members = Vec::with_capacity(members_v.len());
    for (i, m) in members_v.iter().enumerate() {
        let ptr = at("/members", i);
        let sp = space
            .clone()
            .or_else(|| members.first().map(|f: &DiscreteMeasure| f.space().clone()));
        let p = match sp {
            Some(s) => measure_entry(m, &ptr, &s, base)?,
            None => match m {
                Value::String(rel) => {
                    let path = resolve(base, rel);
                    read_measure(&path, None)
                        .map_err(|e| Error::schema(&ptr, format!("{}: {e}", path.display())))?
                }
                _ => parse_measure(m, &ptr, None)?,
            },
        };
        members.push(p);
    }
    if members.is_empty() {
        return Err(Error::schema("/members", "family has no members"));
    }
    let space = members[0].space().clone();
    let certs = match opt_field(v, "certificates") {
        Some(c) => parse_certificates(c, "/certificates", &space)?,
        None => Certificates::default(),
    };
    if certs.infinite {
        return Err(Error::schema(
            "/certificates/infinite",
            "a family given by its members is finite",
        ));
    }
    let name = opt_field(v, "name")
        .and_then(Value::as_str)
        .unwrap_or("members");
    located(
        MeasureFamily::from_members(name, members, certs),
        "/members",
    )
}

fn parse_sequence(v: &Value) -> Result<DiracSequence> {
    let kind = str_field(v, "", "sequence")?;
    Ok(match kind {
        "harmonic" => DiracSequence::Harmonic {
            center: opt_field(v, "center")
                .map(|x| num(x, "/center"))
                .transpose()?
                .unwrap_or(0.0),
            scale: opt_field(v, "scale")
                .map(|x| num(x, "/scale"))
                .transpose()?
                .unwrap_or(1.0),
        },
        "linear" => DiracSequence::Linear {
            start: opt_field(v, "start")
                .map(|x| num(x, "/start"))
                .transpose()?
                .unwrap_or(0.0),
            slope: opt_field(v, "slope")
                .map(|x| num(x, "/slope"))
                .transpose()?
                .unwrap_or(1.0),
        },
        "constant" => DiracSequence::Constant {
            value: num_field(v, "", "value")?,
        },
        other => {
            return Err(Error::schema(
                "/sequence",
                format!("unknown sequence '{other}'"),
            ))
        }
    })
}

pub fn read_family(path: &Path) -> Result<MeasureFamily> {
    let v = read_json(path)?;
    parse_family(&v, path.parent().unwrap_or(Path::new(".")))
}

/// Test-function expression tree.
pub fn parse_lipschitz(space: &MetricSpace, v: &Value, ptr: &str) -> Result<LipschitzFn> {
    let kind = str_field(v, ptr, "kind")?;
    let child = |key: &str| -> Result<Box<LipschitzFn>> {
        Ok(Box::new(parse_lipschitz(
            space,
            field(v, ptr, key)?,
            &at(ptr, key),
        )?))
    };
    let children = || -> Result<Vec<LipschitzFn>> {
        let cptr = at(ptr, "children");
        array(field(v, ptr, "children")?, &cptr)?
            .iter()
            .enumerate()
            .map(|(i, c)| parse_lipschitz(space, c, &at(&cptr, i)))
            .collect()
    };
    let point = |key: &str| parse_point(space, field(v, ptr, key)?, &at(ptr, key));
    let f = match kind {
        "distance_to" => LipschitzFn::DistanceTo(point("point")?),
        "negate" => LipschitzFn::Negate(child("child")?),
        "shift" => LipschitzFn::Shift(child("child")?, num_field(v, ptr, "by")?),
        "max" => located(crate::lipschitz::pointwise_max(children()?), ptr)?,
        "min" => located(crate::lipschitz::pointwise_min(children()?), ptr)?,
        "clamp" => located(
            child("child")?.clamp(num_field(v, ptr, "lo")?, num_field(v, ptr, "hi")?),
            ptr,
        )?,
        "phi_cutoff" => located(
            crate::lipschitz::phi_cutoff(point("center")?, num_field(v, ptr, "radius")?),
            ptr,
        )?,
        "psi_cutoff" => located(
            crate::lipschitz::psi_cutoff(point("center")?, num_field(v, ptr, "radius")?),
            ptr,
        )?,
        "truncation" => {
            let radius = num_field(v, ptr, "radius")?;
            if !(radius > 0.0) {
                return Err(Error::schema(at(ptr, "radius"), "radius must be positive"));
            }
            let part = match str_field(v, ptr, "part")? {
                "low" => TruncationPart::Low,
                "high" => TruncationPart::High,
                other => {
                    return Err(Error::schema(
                        at(ptr, "part"),
                        format!("unknown part '{other}'"),
                    ))
                }
            };
            LipschitzFn::Truncation {
                child: child("child")?,
                radius,
                part,
            }
        }
        "tabulated" => {
            let domain = parse_points(space, field(v, ptr, "domain")?, &at(ptr, "domain"))?;
            let values = numbers(field(v, ptr, "values")?, &at(ptr, "values"))?;
            LipschitzFn::Tabulated(located(
                Table::new(space, domain, values, LIPSCHITZ_TOL),
                ptr,
            )?)
        }
        other => {
            return Err(Error::schema(
                at(ptr, "kind"),
                format!("unknown function kind '{other}'"),
            ))
        }
    };
    Ok(f)
}

/// Inverse of [`parse_lipschitz`].
pub fn lipschitz_to_json(f: &LipschitzFn) -> Value {
    let pt = |p: &Point| serde_json::to_value(p).expect("point serializes");
    match f {
        LipschitzFn::Tabulated(t) => json!({
            "kind": "tabulated",
            "domain": t.domain().iter().map(pt).collect::<Vec<_>>(),
            "values": t.values(),
        }),
        LipschitzFn::DistanceTo(a) => json!({"kind": "distance_to", "point": pt(a)}),
        LipschitzFn::Negate(c) => json!({"kind": "negate", "child": lipschitz_to_json(c)}),
        LipschitzFn::Shift(c, by) => {
            json!({"kind": "shift", "child": lipschitz_to_json(c), "by": by})
        }
        LipschitzFn::Max(cs) => {
            json!({"kind": "max", "children": cs.iter().map(lipschitz_to_json).collect::<Vec<_>>()})
        }
        LipschitzFn::Min(cs) => {
            json!({"kind": "min", "children": cs.iter().map(lipschitz_to_json).collect::<Vec<_>>()})
        }
        LipschitzFn::Clamp { child, lo, hi } => {
            json!({"kind": "clamp", "child": lipschitz_to_json(child), "lo": lo, "hi": hi})
        }
        LipschitzFn::PhiCutoff { center, radius } => {
            json!({"kind": "phi_cutoff", "center": pt(center), "radius": radius})
        }
        LipschitzFn::PsiCutoff { center, radius } => {
            json!({"kind": "psi_cutoff", "center": pt(center), "radius": radius})
        }
        LipschitzFn::Truncation {
            child,
            radius,
            part,
        } => json!({
            "kind": "truncation",
            "child": lipschitz_to_json(child),
            "radius": radius,
            "part": match part { TruncationPart::Low => "low", TruncationPart::High => "high" },
        }),
    }
}

/// A list of test functions, either an array or `{"functions": [...]}`.
pub fn parse_lipschitz_list(space: &MetricSpace, v: &Value) -> Result<Vec<LipschitzFn>> {
    let (list, ptr) = match v.get("functions") {
        Some(l) => (l, "/functions"),
        None => (v, ""),
    };
    array(list, ptr)?
        .iter()
        .enumerate()
        .map(|(i, f)| parse_lipschitz(space, f, &at(ptr, i)))
        .collect()
}

/// Object helper used by reports.
pub fn object(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(
        entries
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_follow_the_space() {
        let fin = MetricSpace::finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(parse_point(&fin, &json!(1), "").unwrap(), Point::Index(1));
        assert_eq!(
            parse_point(&MetricSpace::RealLine, &json!(1), "").unwrap(),
            Point::Real(1.0)
        );
        let e = parse_point(&fin, &json!(2), "/support/0").unwrap_err();
        assert!(
            matches!(e, Error::Schema { ref pointer, .. } if pointer == "/support/0"),
            "{e}"
        );
    }

    #[test]
    fn measure_roundtrip() {
        let v = json!({"space": {"kind": "c01_sup"}, "support": [{"t": [0, 1], "v": [1, 2]}, {"t": [0, 1], "v": [0, 0]}], "weights": [0.25, 0.75]});
        let p = parse_measure(&v, "", None).unwrap();
        let back = parse_measure(&measure_to_json(&p), "", None).unwrap();
        assert!(p.same_as(&back));
    }

    #[test]
    fn schema_errors_point_at_fields() {
        let v = json!({"space": {"kind": "euclidean", "dim": 2}, "support": [[0, 0], [1]], "weights": [0.5, 0.5]});
        match parse_measure(&v, "", None).unwrap_err() {
            Error::Schema { pointer, .. } => assert_eq!(pointer, "/support/1"),
            e => panic!("{e}"),
        }
        let v = json!({"space": {"kind": "torus"}, "support": [], "weights": []});
        match parse_measure(&v, "", None).unwrap_err() {
            Error::Schema { pointer, .. } => assert_eq!(pointer, "/space/kind"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn lipschitz_tree_roundtrip() {
        let s = MetricSpace::RealLine;
        let v = json!({"kind": "max", "children": [
            {"kind": "distance_to", "point": 0.0},
            {"kind": "truncation", "part": "high", "radius": 2.0, "child": {"kind": "shift", "by": -1.0, "child": {"kind": "distance_to", "point": 1.0}}},
            {"kind": "clamp", "lo": -1.0, "hi": 1.0, "child": {"kind": "negate", "child": {"kind": "psi_cutoff", "center": 0.0, "radius": 1.0}}}
        ]});
        let f = parse_lipschitz(&s, &v, "").unwrap();
        let g = parse_lipschitz(&s, &lipschitz_to_json(&f), "").unwrap();
        for x in [-3.0, -0.5, 0.0, 0.7, 2.0, 9.0] {
            let x = Point::Real(x);
            assert_eq!(f.evaluate(&s, &x).unwrap(), g.evaluate(&s, &x).unwrap());
        }
    }

    #[test]
    fn builtin_families() {
        let f = parse_family(
            &json!({"builtin": "counterexample", "M": 2.0, "horizon": 10}),
            Path::new("."),
        )
        .unwrap();
        assert_eq!(f.horizon(), 10);
        let f = parse_family(
            &json!({"builtin": "dirac_sequence", "sequence": "linear", "slope": 2.0}),
            Path::new("."),
        )
        .unwrap();
        assert_eq!(f.dirac_location(3).unwrap(), Some(Point::Real(6.0)));
        assert!(parse_family(&json!({"builtin": "nope"}), Path::new(".")).is_err());
    }
}
