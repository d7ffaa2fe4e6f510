//! Plain-text dump of one replicate.
//!
//! ```text
//! #mrf-dataset v1
//! #space=sphere
//! #n_train=200
//! ...
//! split,x0,...,y0,...,m0,...
//! train,0.41,...
//! ```
//!
//! `y*` columns hold the encoded response and `m*` the encoded noiseless
//! mean. Floats are written in shortest round-trip form, so reading a dump
//! back reproduces the replicate bit for bit.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{MrfError, Result};
use crate::forest::Covariates;
use crate::metric::MetricSpace;
use crate::simgen::{Replicate, Sample, ScenarioConfig, SingleIndexParams, SpaceKind};

const MAGIC: &str = "#mrf-dataset v1";

#[derive(Debug, Clone, PartialEq)]
pub struct DumpHeader {
    pub config: ScenarioConfig,
    pub payload_width: usize,
    pub params: SingleIndexParams,
}

impl DumpHeader {
    fn lines(&self) -> Vec<String> {
        let beta: Vec<String> = self.params.beta.iter().map(|b| format!("{b:?}")).collect();
        vec![
            MAGIC.to_string(),
            format!("#space={}", self.config.space),
            format!("#n_train={}", self.config.n_train),
            format!("#n_test={}", self.config.n_test),
            format!("#d={}", self.config.d),
            format!("#seed={}", self.config.seed),
            format!("#payload_width={}", self.payload_width),
            format!("#alpha={:?}", self.params.alpha),
            format!("#beta={}", beta.join(";")),
        ]
    }

    fn parse(fields: &BTreeMap<String, (usize, String)>) -> Result<Self> {
        fn get<'a>(f: &'a BTreeMap<String, (usize, String)>, key: &str) -> Result<(usize, &'a str)> {
            f.get(key)
                .map(|(l, v)| (*l, v.as_str()))
                .ok_or_else(|| MrfError::Parse {
                    line: 0,
                    reason: format!("missing header `{key}`"),
                })
        }
        fn num<T: std::str::FromStr>(f: &BTreeMap<String, (usize, String)>, key: &str) -> Result<T> {
            let (line, v) = get(f, key)?;
            v.parse().map_err(|_| MrfError::Parse {
                line,
                reason: format!("bad value for `{key}`: `{v}`"),
            })
        }
        let (line, space) = get(fields, "space")?;
        let space: SpaceKind = space.parse().map_err(|_| MrfError::Parse {
            line,
            reason: format!("unknown space `{space}`"),
        })?;
        let (line, beta) = get(fields, "beta")?;
        let beta = if beta.is_empty() {
            Vec::new()
        } else {
            beta.split(';')
                .map(|b| {
                    b.parse().map_err(|_| MrfError::Parse {
                        line,
                        reason: format!("bad beta entry `{b}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?
        };
        let header = DumpHeader {
            config: ScenarioConfig {
                space,
                n_train: num(fields, "n_train")?,
                d: num(fields, "d")?,
                n_test: num(fields, "n_test")?,
                seed: num(fields, "seed")?,
            },
            payload_width: num(fields, "payload_width")?,
            params: SingleIndexParams {
                alpha: num(fields, "alpha")?,
                beta,
            },
        };
        if header.params.d() != header.config.d {
            return Err(MrfError::Parse {
                line,
                reason: format!("beta has {} entries, d is {}", header.params.d(), header.config.d),
            });
        }
        Ok(header)
    }
}

/// Writes `rep` with responses encoded by `space`.
pub fn write_replicate<S: MetricSpace, W: Write>(
    mut out: W,
    space: &S,
    rep: &Replicate<S::Point>,
) -> Result<()> {
    let header = DumpHeader {
        config: rep.config.clone(),
        payload_width: space.payload_width(),
        params: rep.params.clone(),
    };
    for line in header.lines() {
        writeln!(out, "{line}")?;
    }
    let d = rep.config.d;
    let w = header.payload_width;
    let mut cols = vec!["split".to_string()];
    cols.extend((0..d).map(|j| format!("x{j}")));
    cols.extend((0..w).map(|j| format!("y{j}")));
    cols.extend((0..w).map(|j| format!("m{j}")));
    writeln!(out, "{}", cols.join(","))?;
    for (tag, sample) in [("train", &rep.train), ("test", &rep.test)] {
        for i in 0..sample.x.n() {
            let mut row = vec![tag.to_string()];
            row.extend(sample.x.row(i).iter().map(|v| format!("{v:?}")));
            row.extend(space.encode(&sample.y[i]).iter().map(|v| format!("{v:?}")));
            row.extend(space.encode(&sample.truth[i]).iter().map(|v| format!("{v:?}")));
            writeln!(out, "{}", row.join(","))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Default)]
struct Part {
    x: Vec<f64>,
    y: Vec<f64>,
    truth: Vec<f64>,
    n: usize,
}

/// Reads a dump written by [`write_replicate`], decoding with `space`.
pub fn read_replicate<S: MetricSpace, R: BufRead>(input: R, space: &S) -> Result<Replicate<S::Point>> {
    let mut lines = input.lines().enumerate();
    let parse_err = |line: usize, reason: String| MrfError::Parse { line: line + 1, reason };

    match lines.next() {
        Some((_, Ok(l))) if l.trim_end() == MAGIC => {}
        Some((i, Ok(l))) => return Err(parse_err(i, format!("expected `{MAGIC}`, found `{l}`"))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(parse_err(0, "empty input".into())),
    }

    let mut fields = BTreeMap::new();
    let mut columns = None;
    for (i, line) in lines.by_ref() {
        let line = line?;
        if let Some(kv) = line.strip_prefix('#') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| parse_err(i, format!("malformed header `{line}`")))?;
            fields.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        } else {
            columns = Some((i, line));
            break;
        }
    }
    let header = DumpHeader::parse(&fields)?;
    if header.payload_width != space.payload_width() {
        return Err(parse_err(
            0,
            format!(
                "payload width {} does not match {} space ({})",
                header.payload_width,
                space.name(),
                space.payload_width()
            ),
        ));
    }
    let (d, w) = (header.config.d, header.payload_width);
    let (ci, columns) = columns.ok_or_else(|| parse_err(fields.len(), "missing column line".into()))?;
    if columns.split(',').count() != 1 + d + 2 * w {
        return Err(parse_err(ci, format!("expected {} columns", 1 + d + 2 * w)));
    }

    let (mut train, mut test) = (Part::default(), Part::default());
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let part = match cells.next() {
            Some("train") => &mut train,
            Some("test") => &mut test,
            other => return Err(parse_err(i, format!("unknown split `{}`", other.unwrap_or("")))),
        };
        let values = cells
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(i, e.to_string()))?;
        if values.len() != d + 2 * w {
            return Err(parse_err(
                i,
                format!("expected {} values, found {}", d + 2 * w, values.len()),
            ));
        }
        part.x.extend_from_slice(&values[..d]);
        part.y.extend_from_slice(&values[d..d + w]);
        part.truth.extend_from_slice(&values[d + w..]);
        part.n += 1;
    }

    let build = |p: Part, expected: usize, tag: &str| -> Result<Sample<S::Point>> {
        if p.n != expected {
            return Err(parse_err(0, format!("expected {expected} {tag} rows, found {}", p.n)));
        }
        let decode = |flat: &[f64]| {
            flat.chunks(w.max(1))
                .enumerate()
                .map(|(i, c)| space.decode(c).map_err(|e| e.at_sample(i)))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Sample {
            x: Covariates::from_flat(p.n, d, p.x)?,
            y: decode(&p.y)?,
            truth: decode(&p.truth)?,
        })
    };
    Ok(Replicate {
        train: build(train, header.config.n_train, "train")?,
        test: build(test, header.config.n_test, "test")?,
        config: header.config,
        params: header.params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{generate_replicate, Scenario, SphereScenario, WarpingScenario};

    fn round_trip<Sc: Scenario>(sc: Sc, kind: SpaceKind)
    where
        <Sc::Space as MetricSpace>::Point: PartialEq + std::fmt::Debug,
    {
        let mut cfg = ScenarioConfig::new(kind, 12, 3, 9);
        cfg.n_test = 5;
        let rep = generate_replicate(&sc, &cfg).unwrap();
        let mut buf = Vec::new();
        write_replicate(&mut buf, &sc.space(), &rep).unwrap();
        let back = read_replicate(buf.as_slice(), &sc.space()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn sphere_dump_round_trips() {
        round_trip(SphereScenario::default(), SpaceKind::Sphere);
    }

    #[test]
    fn warping_dump_round_trips() {
        round_trip(WarpingScenario::default(), SpaceKind::Warping);
    }

    #[test]
    fn rejects_wrong_space() {
        let sc = SphereScenario::default();
        let rep = generate_replicate(&sc, &ScenarioConfig::new(SpaceKind::Sphere, 4, 1, 1)).unwrap();
        let mut buf = Vec::new();
        write_replicate(&mut buf, &sc.space(), &rep).unwrap();
        let err = read_replicate(buf.as_slice(), &crate::spaces::EuclideanSpace::new());
        assert!(matches!(err, Err(MrfError::Parse { .. })));
        assert!(read_replicate(&b"hello\n"[..], &sc.space()).is_err());
    }
}
