//! Line-oriented scenario files.
//!
//! ```text
//! scenario = flat_example
//! description = linear map from flat R^4 onto a plane in R^3
//!
//! [manifold R4]
//! coords = x1, x2, x3, x4
//! metric = identity
//! J = canonical
//!
//! [manifold R3]
//! coords = y1, y2, y3
//! metric = identity
//!
//! [map F]
//! source = R4
//! target = R3
//! components = (x1 - x3)/sqrt(2), 0, (x2 + x4)/sqrt(2)
//! probe Z1 = 1, 0, 1, 0
//!
//! [verify]
//! map = F
//! sampling = uniform
//! seed = 7
//! count = 32
//! region = [-1, 1], [-1, 1], [-1, 1], [-1, 1]
//! checks = all
//! tolerance umbilical_fibers = 1e-5
//! ```
//!
//! Metric entries are `g i j = expr` (1-based, the mirrored entry is filled in)
//! and complex structures are `J = canonical` or `J i j = expr`. Numbers
//! anywhere may be constant expressions such as `pi/4`. Everything after `#`
//! on a line is a comment.

use std::collections::BTreeMap;
use std::sync::Arc;

use riemap_core::{CheckKind, ExprError, Expression, ManifoldSpec, MapSpec, Sampling, Tolerances};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: unresolved {kind} `{name}`")]
    Unresolved { line: usize, kind: &'static str, name: String },
    #[error("line {line}: {message}")]
    Dimension { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: riemap_core::Error,
    },
}

type Result<T> = std::result::Result<T, ScenarioError>;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub manifolds: Vec<Arc<ManifoldSpec>>,
    pub maps: Vec<Arc<MapSpec>>,
    pub verifications: Vec<Verification>,
}

/// One `[verify]` block.
#[derive(Debug, Clone)]
pub struct Verification {
    pub map: Arc<MapSpec>,
    pub sampling: Sampling,
    pub checks: Vec<CheckKind>,
    pub tolerances: Tolerances,
}

/// A value with the position where it starts.
#[derive(Debug, Clone)]
struct Spanned {
    text: String,
    line: usize,
    column: usize,
}

impl Spanned {
    fn error(&self, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    /// Sub-value starting `offset` bytes into this one.
    fn slice(&self, offset: usize, text: &str) -> Spanned {
        Spanned {
            text: text.to_string(),
            line: self.line,
            column: self.column + offset,
        }
    }
}

#[derive(Debug, Default)]
struct ManifoldDraft {
    line: usize,
    coords: Option<Spanned>,
    identity: bool,
    metric: Vec<(usize, usize, Spanned)>,
    canonical_j: bool,
    j: Vec<(usize, usize, Spanned)>,
}

#[derive(Debug, Default)]
struct MapDraft {
    line: usize,
    source: Option<Spanned>,
    target: Option<Spanned>,
    components: Option<Spanned>,
    probes: Vec<(String, Spanned)>,
    rank_tolerance: Option<Spanned>,
}

#[derive(Debug, Default)]
struct VerifyDraft {
    line: usize,
    map: Option<Spanned>,
    sampling: Option<Spanned>,
    seed: Option<Spanned>,
    count: Option<Spanned>,
    region: Option<Spanned>,
    points: Option<Spanned>,
    checks: Option<Spanned>,
    tolerances: Vec<(Spanned, Spanned)>,
}

enum Section {
    Header,
    Manifold(String),
    Map(String),
    Verify(usize),
}

/// Splits on `sep` outside parentheses and brackets, with byte offsets.
fn split_top(text: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &text[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &text[start..]));
    out
}

/// Trimmed pieces of a comma-separated list; an all-blank value is the empty list.
fn list(value: &Spanned, sep: char) -> Result<Vec<Spanned>> {
    if value.text.trim().is_empty() {
        return Ok(Vec::new());
    }
    split_top(&value.text, sep)
        .into_iter()
        .map(|(off, piece)| {
            let lead = piece.len() - piece.trim_start().len();
            let item = value.slice(off + lead, piece.trim());
            if item.text.is_empty() {
                Err(item.error("empty list entry"))
            } else {
                Ok(item)
            }
        })
        .collect()
}

fn expr_error(at: &Spanned, e: ExprError) -> ScenarioError {
    let column = match &e {
        ExprError::Syntax { column, .. }
        | ExprError::UnknownIdentifier { column, .. }
        | ExprError::Arity { column, .. } => at.column + column.saturating_sub(1),
        _ => at.column,
    };
    ScenarioError::Parse {
        line: at.line,
        column,
        message: e.to_string(),
    }
}

fn number(at: &Spanned) -> Result<f64> {
    let e = Expression::parse::<&str>(&at.text, &[]).map_err(|e| expr_error(at, e))?;
    let v = e.eval(&[]).map_err(|e| expr_error(at, e))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(at.error(format!("`{}` is not a finite number", at.text)))
    }
}

fn integer(at: &Spanned, what: &str) -> Result<u64> {
    at.text
        .trim()
        .parse()
        .map_err(|_| at.error(format!("{what} must be a non-negative integer, found `{}`", at.text)))
}

fn numbers(at: &Spanned) -> Result<Vec<f64>> {
    list(at, ',')?.iter().map(number).collect()
}

/// `(a, b)` or `[a, b]` with the given delimiters, returning the inner value.
fn delimited(at: &Spanned, open: char, close: char) -> Result<Spanned> {
    let t = &at.text;
    if !(t.starts_with(open) && t.ends_with(close)) || t.len() < 2 {
        return Err(at.error(format!("expected `{open}...{close}`, found `{t}`")));
    }
    Ok(at.slice(1, &t[1..t.len() - 1]))
}

fn set_once(slot: &mut Option<Spanned>, key: &Spanned, value: Spanned) -> Result<()> {
    if slot.is_some() {
        return Err(key.error(format!("duplicate key `{}`", key.text)));
    }
    *slot = Some(value);
    Ok(())
}

/// `g 1 2` style keys: returns zero-based indices.
fn indexed_key(key: &Spanned, words: &[&str]) -> Result<(usize, usize)> {
    if words.len() != 3 {
        return Err(key.error(format!("expected `{} i j`, found `{}`", words[0], key.text)));
    }
    let index = |w: &str| -> Result<usize> {
        match w.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(key.error(format!("index `{w}` must be a positive integer"))),
        }
    };
    Ok((index(words[1])?, index(words[2])?))
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut name = None;
    let mut description = String::new();
    let mut manifolds: Vec<(String, ManifoldDraft)> = Vec::new();
    let mut maps: Vec<(String, MapDraft)> = Vec::new();
    let mut verifies: Vec<VerifyDraft> = Vec::new();
    let mut section = Section::Header;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        let column = lead + 1;
        let at = |col: usize, text: &str| Spanned {
            text: text.to_string(),
            line,
            column: col,
        };
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(inner) = inner.strip_suffix(']') else {
                return Err(at(column, trimmed).error("unterminated section header"));
            };
            let words: Vec<&str> = inner.split_whitespace().collect();
            let duplicate = |list: &[&String], n: &str| list.iter().any(|x| x.as_str() == n);
            section = match words.as_slice() {
                ["manifold", n] => {
                    if duplicate(&manifolds.iter().map(|m| &m.0).collect::<Vec<_>>(), n) {
                        return Err(at(column, trimmed).error(format!("manifold `{n}` declared twice")));
                    }
                    manifolds.push((n.to_string(), ManifoldDraft { line, ..Default::default() }));
                    Section::Manifold(n.to_string())
                }
                ["map", n] => {
                    if duplicate(&maps.iter().map(|m| &m.0).collect::<Vec<_>>(), n) {
                        return Err(at(column, trimmed).error(format!("map `{n}` declared twice")));
                    }
                    maps.push((n.to_string(), MapDraft { line, ..Default::default() }));
                    Section::Map(n.to_string())
                }
                ["verify"] => {
                    verifies.push(VerifyDraft { line, ..Default::default() });
                    Section::Verify(verifies.len() - 1)
                }
                _ => return Err(at(column, trimmed).error(format!("unknown section `[{inner}]`"))),
            };
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(at(column, trimmed).error("expected `key = value`"));
        };
        let key = at(column, content[..eq].trim());
        let after = &content[eq + 1..];
        let value_lead = after.len() - after.trim_start().len();
        let value = at(eq + 2 + value_lead, after.trim());
        let words: Vec<&str> = key.text.split_whitespace().collect();
        let unknown = |what: &str| key.error(format!("unknown {what} key `{}`", key.text));

        match &section {
            Section::Header => match key.text.as_str() {
                "scenario" => {
                    if value.text.is_empty() {
                        return Err(value.error("scenario name is empty"));
                    }
                    set_once(&mut name, &key, value)?;
                }
                "description" => description = value.text,
                _ => return Err(unknown("scenario")),
            },
            Section::Manifold(n) => {
                let draft = &mut manifolds.iter_mut().find(|m| &m.0 == n).expect("declared").1;
                match words.as_slice() {
                    ["coords"] => set_once(&mut draft.coords, &key, value)?,
                    ["metric"] if value.text == "identity" => draft.identity = true,
                    ["metric"] => return Err(value.error("metric must be `identity`; give other metrics as `g i j = expr`")),
                    ["g", ..] => {
                        let (i, j) = indexed_key(&key, &words)?;
                        draft.metric.push((i, j, value));
                    }
                    ["J"] if value.text == "canonical" => draft.canonical_j = true,
                    ["J"] => return Err(value.error("J must be `canonical`; give other structures as `J i j = expr`")),
                    ["J", ..] => {
                        let (i, j) = indexed_key(&key, &words)?;
                        draft.j.push((i, j, value));
                    }
                    _ => return Err(unknown("manifold")),
                }
            }
            Section::Map(n) => {
                let draft = &mut maps.iter_mut().find(|m| &m.0 == n).expect("declared").1;
                match words.as_slice() {
                    ["source"] => set_once(&mut draft.source, &key, value)?,
                    ["target"] => set_once(&mut draft.target, &key, value)?,
                    ["components"] => set_once(&mut draft.components, &key, value)?,
                    ["rank_tolerance"] => set_once(&mut draft.rank_tolerance, &key, value)?,
                    ["probe", p] => draft.probes.push((p.to_string(), value)),
                    _ => return Err(unknown("map")),
                }
            }
            Section::Verify(i) => {
                let draft = &mut verifies[*i];
                match words.as_slice() {
                    ["map"] => set_once(&mut draft.map, &key, value)?,
                    ["sampling"] => set_once(&mut draft.sampling, &key, value)?,
                    ["seed"] => set_once(&mut draft.seed, &key, value)?,
                    ["count"] => set_once(&mut draft.count, &key, value)?,
                    ["region"] => set_once(&mut draft.region, &key, value)?,
                    ["points"] => set_once(&mut draft.points, &key, value)?,
                    ["checks"] => set_once(&mut draft.checks, &key, value)?,
                    ["tolerance", c] => draft.tolerances.push((key.slice(key.text.find(c).unwrap_or(0), c), value)),
                    _ => return Err(unknown("verify")),
                }
            }
        }
    }

    let name = name
        .ok_or(ScenarioError::Parse {
            line: 1,
            column: 1,
            message: "missing `scenario = NAME`".into(),
        })?
        .text;

    let mut built_manifolds = Vec::new();
    for (n, draft) in &manifolds {
        built_manifolds.push(Arc::new(build_manifold(n, draft)?));
    }
    let mut built_maps = Vec::new();
    for (n, draft) in &maps {
        built_maps.push(Arc::new(build_map(n, draft, &built_manifolds)?));
    }
    let verifications = verifies
        .iter()
        .map(|d| build_verification(d, &built_maps))
        .collect::<Result<Vec<_>>>()?;

    Ok(Scenario {
        name,
        description,
        manifolds: built_manifolds,
        maps: built_maps,
        verifications,
    })
}

fn invalid(line: usize) -> impl Fn(riemap_core::Error) -> ScenarioError {
    move |source| ScenarioError::Invalid { line, source }
}

fn build_manifold(name: &str, d: &ManifoldDraft) -> Result<ManifoldSpec> {
    let Some(coords_at) = &d.coords else {
        return Err(ScenarioError::Parse {
            line: d.line,
            column: 1,
            message: format!("manifold `{name}` has no `coords`"),
        });
    };
    let coords: Vec<String> = list(coords_at, ',')?.into_iter().map(|s| s.text).collect();
    if coords.is_empty() {
        return Err(coords_at.error("no coordinates"));
    }
    let m = coords.len();
    let shared: Arc<[String]> = coords.clone().into();
    let parse = |at: &Spanned| Expression::parse_shared(&at.text, shared.clone()).map_err(|e| expr_error(at, e));
    let bounds = |i: usize, j: usize, at: &Spanned, what: &str| {
        if i >= m || j >= m {
            Err(ScenarioError::Dimension {
                line: at.line,
                message: format!("{what} index ({}, {}) outside a {m}-dimensional chart", i + 1, j + 1),
            })
        } else {
            Ok(())
        }
    };

    if d.identity && !d.metric.is_empty() {
        return Err(ScenarioError::Parse {
            line: d.metric[0].2.line,
            column: 1,
            message: "metric entries given together with `metric = identity`".into(),
        });
    }
    if !d.identity && d.metric.is_empty() {
        return Err(ScenarioError::Parse {
            line: d.line,
            column: 1,
            message: format!("manifold `{name}` has no metric"),
        });
    }
    let zero = Expression::constant(0.0, shared.clone());
    let mut metric: Vec<Vec<Expression>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if d.identity && i == j {
                        Expression::constant(1.0, shared.clone())
                    } else {
                        zero.clone()
                    }
                })
                .collect()
        })
        .collect();
    let mut seen = BTreeMap::new();
    for (i, j, at) in &d.metric {
        bounds(*i, *j, at, "metric")?;
        let key = (*i.min(j), *i.max(j));
        if seen.insert(key, ()).is_some() {
            return Err(at.error(format!("metric entry ({}, {}) given twice", key.0 + 1, key.1 + 1)));
        }
        let e = parse(at)?;
        metric[*i][*j] = e.clone();
        metric[*j][*i] = e;
    }
    let mut spec = ManifoldSpec::new(name, &coords, metric).map_err(invalid(d.line))?;

    if d.canonical_j && !d.j.is_empty() {
        return Err(ScenarioError::Parse {
            line: d.j[0].2.line,
            column: 1,
            message: "J entries given together with `J = canonical`".into(),
        });
    }
    if d.canonical_j {
        spec = spec.with_canonical_complex_structure().map_err(invalid(d.line))?;
    } else if !d.j.is_empty() {
        let mut j = vec![vec![zero.clone(); m]; m];
        for (a, b, at) in &d.j {
            bounds(*a, *b, at, "J")?;
            j[*a][*b] = parse(at)?;
        }
        spec = spec.with_complex_structure(j).map_err(invalid(d.j[0].2.line))?;
    }
    Ok(spec)
}

fn resolve<'a, T>(items: &'a [Arc<T>], at: &Spanned, kind: &'static str, name_of: impl Fn(&T) -> &str) -> Result<&'a Arc<T>> {
    items
        .iter()
        .find(|x| name_of(x) == at.text)
        .ok_or_else(|| ScenarioError::Unresolved {
            line: at.line,
            kind,
            name: at.text.clone(),
        })
}

fn required<'a>(slot: &'a Option<Spanned>, line: usize, what: &str) -> Result<&'a Spanned> {
    slot.as_ref().ok_or_else(|| ScenarioError::Parse {
        line,
        column: 1,
        message: format!("missing `{what}`"),
    })
}

fn build_map(name: &str, d: &MapDraft, manifolds: &[Arc<ManifoldSpec>]) -> Result<MapSpec> {
    let source = resolve(manifolds, required(&d.source, d.line, "source")?, "manifold", |m| m.name())?;
    let target = resolve(manifolds, required(&d.target, d.line, "target")?, "manifold", |m| m.name())?;
    let comp_at = required(&d.components, d.line, "components")?;
    let pieces = list(comp_at, ',')?;
    if pieces.len() != target.dim() {
        return Err(ScenarioError::Dimension {
            line: comp_at.line,
            message: format!(
                "map `{name}` has {} components but target `{}` has dimension {}",
                pieces.len(),
                target.name(),
                target.dim()
            ),
        });
    }
    let components = pieces
        .iter()
        .map(|at| Expression::parse_shared(&at.text, source.coords().clone()).map_err(|e| expr_error(at, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut map = MapSpec::new(name, source.clone(), target.clone(), components).map_err(invalid(comp_at.line))?;
    for (probe, at) in &d.probes {
        let v = numbers(at)?;
        if v.len() != source.dim() {
            return Err(ScenarioError::Dimension {
                line: at.line,
                message: format!("probe `{probe}` has {} entries, source has dimension {}", v.len(), source.dim()),
            });
        }
        map = map.with_probe(probe, &v).map_err(invalid(at.line))?;
    }
    if let Some(at) = &d.rank_tolerance {
        let tol = number(at)?;
        if tol <= 0.0 {
            return Err(at.error("rank_tolerance must be positive"));
        }
        map = map.with_rank_tolerance(tol);
    }
    Ok(map)
}

fn build_verification(d: &VerifyDraft, maps: &[Arc<MapSpec>]) -> Result<Verification> {
    let map = resolve(maps, required(&d.map, d.line, "map")?, "map", |m| m.name())?.clone();
    let dim = map.source().dim();
    let strategy = d.sampling.as_ref().map_or("uniform", |s| s.text.as_str());
    let count = match &d.count {
        Some(at) => {
            let c = integer(at, "count")? as usize;
            if c == 0 {
                return Err(at.error("count must be at least 1"));
            }
            Some(c)
        }
        None => None,
    };
    let region = |d: &VerifyDraft| -> Result<Vec<(f64, f64)>> {
        let at = required(&d.region, d.line, "region")?;
        let intervals = list(at, ',')?
            .iter()
            .map(|piece| {
                let inner = delimited(piece, '[', ']')?;
                match numbers(&inner)?.as_slice() {
                    [a, b] if a <= b => Ok((*a, *b)),
                    [_, _] => Err(piece.error("interval lower bound exceeds upper bound")),
                    _ => Err(piece.error("interval needs exactly two bounds")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if intervals.len() != dim {
            return Err(ScenarioError::Dimension {
                line: at.line,
                message: format!("region has {} intervals, source of `{}` has dimension {dim}", intervals.len(), map.name()),
            });
        }
        Ok(intervals)
    };
    let sampling = match strategy {
        "grid" => Sampling::grid(region(d)?, count.unwrap_or(16)),
        "uniform" => {
            let seed = d.seed.as_ref().map(|s| integer(s, "seed")).transpose()?.unwrap_or(0);
            Sampling::uniform(region(d)?, count.unwrap_or(16), seed)
        }
        "explicit" => {
            let at = required(&d.points, d.line, "points")?;
            let points = list(at, ';')?
                .iter()
                .map(|piece| {
                    let p = numbers(&delimited(piece, '(', ')')?)?;
                    if p.len() == dim {
                        Ok(p)
                    } else {
                        Err(ScenarioError::Dimension {
                            line: piece.line,
                            message: format!("point has {} coordinates, source has dimension {dim}", p.len()),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if points.is_empty() {
                return Err(at.error("no points given"));
            }
            Sampling::explicit(points)
        }
        other => {
            let at = d.sampling.as_ref().expect("non-default strategy");
            return Err(at.error(format!("unknown sampling `{other}`, expected grid, uniform or explicit")));
        }
    };

    let checks = match &d.checks {
        None => CheckKind::ALL.to_vec(),
        Some(at) if at.text == "all" => CheckKind::ALL.to_vec(),
        Some(at) => list(at, ',')?
            .iter()
            .map(|c| c.text.parse::<CheckKind>().map_err(|_| c.error(format!("unknown check `{}`", c.text))))
            .collect::<Result<Vec<_>>>()?,
    };
    let mut tolerances = Tolerances::default();
    for (check, at) in &d.tolerances {
        let kind = check
            .text
            .parse::<CheckKind>()
            .map_err(|_| check.error(format!("unknown check `{}`", check.text)))?;
        let tol = number(at)?;
        if tol <= 0.0 {
            return Err(at.error("tolerance must be positive"));
        }
        tolerances.set(kind, tol);
    }
    Ok(Verification {
        map,
        sampling,
        checks,
        tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_respects_nesting() {
        let parts: Vec<&str> = split_top("f(a, b), [1, 2], c", ',').into_iter().map(|p| p.1.trim()).collect();
        assert_eq!(parts, ["f(a, b)", "[1, 2]", "c"]);
    }

    #[test]
    fn constant_numbers() {
        let at = Spanned {
            text: "pi/4".into(),
            line: 1,
            column: 1,
        };
        assert!((number(&at).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn expression_errors_point_into_the_line() {
        let text = "scenario = s\n[manifold M]\ncoords = x\ng 1 1 = 1 + * x\n";
        match parse_scenario(text) {
            Err(ScenarioError::Parse { line, column, .. }) => {
                assert_eq!(line, 4);
                assert!(column >= 9, "column {column}");
            }
            other => panic!("{other:?}"),
        }
    }
}
