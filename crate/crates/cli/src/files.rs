//! JSON formats for algebra elements, phase points and generator specs.
//!
//! Element:
//! ```json
//! {"algebra": "hn", "re": [[1, 0], [0, 0]], "im": [[0, 0], [0, 0]]}
//! {"algebra": "hn", "n": 3, "identity": true}
//! {"algebra": "gamma3", "x0": 1, "vec": [0, 1, 0]}
//! ```
//! Phase point, in chart form (pivot is 1-based, omitted for `gamma3`) or
//! embedded form:
//! ```json
//! {"algebra": "hn", "n": 2, "pivot": 1, "q": [1, 0, 0], "p": [0, 1, 0]}
//! {"x": <element>, "pi": <element>}
//! ```
//! Generator spec, with `u`/`v` given inline or as a path to an element file:
//! ```json
//! {"kind": "S", "u": <element or path>, "v": <element or path>}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use u1kepler::cone::{lift, unlift, Chart, ChartPoint, PhasePoint};
use u1kepler::generators::{GeneratorKind, GeneratorSpec};
use u1kepler::jordan::{AlgebraDescriptor, AlgebraElement, AlgebraKind, CMatrix};
use u1kepler::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "algebra", rename_all = "lowercase", deny_unknown_fields)]
pub enum ElementFile {
    Hn {
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        identity: bool,
        #[serde(default)]
        re: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    Gamma3 {
        x0: f64,
        vec: [f64; 3],
    },
}

fn flatten(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Usage(format!("`{what}` must be a {n}x{n} array")));
    }
    Ok(rows.iter().flatten().copied().collect())
}

impl ElementFile {
    pub fn to_element(&self) -> Result<AlgebraElement> {
        match self {
            ElementFile::Gamma3 { x0, vec } => Ok(AlgebraElement::gamma3(*x0, *vec)),
            ElementFile::Hn {
                n,
                identity,
                re,
                im,
            } => {
                if *identity {
                    if re.is_some() || im.is_some() {
                        return Err(Error::Usage("`identity` excludes `re`/`im`".into()));
                    }
                    let n = n.ok_or_else(|| Error::Usage("`identity` needs `n`".into()))?;
                    return Ok(AlgebraDescriptor::hn(n)?.identity());
                }
                let re = re
                    .as_ref()
                    .ok_or_else(|| Error::Usage("element needs `re`".into()))?;
                let size = re.len();
                if let Some(n) = n {
                    if *n != size {
                        return Err(Error::Usage(format!("`n` = {n} but `re` has {size} rows")));
                    }
                }
                AlgebraDescriptor::hn(size)?;
                let re = flatten(re, size, "re")?;
                let im = match im {
                    Some(im) => flatten(im, size, "im")?,
                    None => vec![0.0; size * size],
                };
                AlgebraElement::hermitian(CMatrix::from_parts(size, &re, &im)?)
            }
        }
    }
}

/// An element given inline or as a path to an element file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Path(String),
    Inline(ElementFile),
}

impl ElementRef {
    pub fn resolve(&self) -> Result<AlgebraElement> {
        match self {
            ElementRef::Inline(e) => e.to_element(),
            ElementRef::Path(p) => parse_json::<ElementFile>(&read(p)?, p)?.to_element(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub u: Option<ElementRef>,
    #[serde(default)]
    pub v: Option<ElementRef>,
}

impl SpecFile {
    pub fn to_spec(&self) -> Result<GeneratorSpec> {
        let u = self.u.as_ref().map(ElementRef::resolve).transpose()?;
        let v = self.v.as_ref().map(ElementRef::resolve).transpose()?;
        GeneratorSpec::from_parts(self.kind, u, v)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointFile {
    Chart {
        algebra: AlgebraKind,
        #[serde(default)]
        n: Option<usize>,
        #[serde(default)]
        pivot: Option<usize>,
        q: Vec<f64>,
        p: Vec<f64>,
    },
    Embedded {
        x: ElementFile,
        pi: ElementFile,
        #[serde(default)]
        pivot: Option<usize>,
    },
}

fn pivot0(pivot: Option<usize>) -> Result<Option<usize>> {
    match pivot {
        Some(0) => Err(Error::Usage("pivots are 1-based".into())),
        Some(k) => Ok(Some(k - 1)),
        None => Ok(None),
    }
}

impl PointFile {
    pub fn to_phase(&self) -> Result<PhasePoint> {
        match self {
            PointFile::Chart {
                algebra,
                n,
                pivot,
                q,
                p,
            } => {
                let (desc, chart) = match algebra {
                    AlgebraKind::Gamma3 => {
                        if pivot.is_some() {
                            return Err(Error::Usage("gamma3 points have no pivot".into()));
                        }
                        (AlgebraDescriptor::gamma3(), Chart::Global)
                    }
                    AlgebraKind::Hn => {
                        let n = n.unwrap_or(q.len().div_ceil(2));
                        let k = pivot0(*pivot)?.unwrap_or(0);
                        (AlgebraDescriptor::hn(n)?, Chart::Pivot(k))
                    }
                };
                lift(&ChartPoint::new(desc, chart, q.clone())?, p)
            }
            PointFile::Embedded { x, pi, pivot } => {
                let (x, pi) = (x.to_element()?, pi.to_element()?);
                let hint = match x.descriptor().kind {
                    AlgebraKind::Hn => Some(match pivot0(*pivot)? {
                        Some(k) => k,
                        None => u1kepler::cone::best_pivot(&x)?,
                    }),
                    AlgebraKind::Gamma3 => None,
                };
                let (pt, p) = unlift(&x, &pi, hint)?;
                lift(&pt, &p)
            }
        }
    }

    pub fn from_phase(ph: &PhasePoint) -> Self {
        let desc = ph.algebra();
        PointFile::Chart {
            algebra: desc.kind,
            n: (desc.kind == AlgebraKind::Hn).then_some(desc.n),
            pivot: match ph.point.chart {
                Chart::Pivot(k) => Some(k + 1),
                Chart::Global => None,
            },
            q: ph.point.q.clone(),
            p: ph.p.clone(),
        }
    }
}

pub fn read(path: &str) -> Result<String> {
    fs::read_to_string(Path::new(path))
        .map_err(|e| Error::Usage(format!("cannot read {path}: {e}")))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Usage(format!("malformed {origin}: {e}")))
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
pub fn inline_or_file<T: for<'de> Deserialize<'de>>(arg: &str) -> Result<T> {
    if arg.trim_start().starts_with('{') {
        parse_json(arg, "inline JSON")
    } else {
        parse_json(&read(arg)?, arg)
    }
}

pub fn chart_label(chart: Chart) -> serde_json::Value {
    match chart {
        Chart::Pivot(k) => serde_json::json!({ "pivot": k + 1 }),
        Chart::Global => serde_json::json!("global"),
    }
}
