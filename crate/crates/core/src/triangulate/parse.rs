use super::{Combinatorics, Cusp, EquationRow, IdealTriangulation, RowKind, TetGluing};
use crate::error::{Error, Result};
use crate::hmodel::C64;

#[derive(Default)]
struct PartialCusp {
    meridian: Option<EquationRow>,
    longitude: Option<EquationRow>,
    framing_shift: Option<i64>,
    filling: Option<(i64, i64)>,
    drilled: bool,
    peri_meridian: Option<String>,
    peri_longitude: Option<String>,
}

fn ints(line: usize, toks: &[&str]) -> Result<Vec<i64>> {
    toks.iter()
        .map(|t| t.parse::<i64>().map_err(|_| Error::parse(line, format!("expected integer, found {t:?}"))))
        .collect()
}

fn index(line: usize, tok: Option<&&str>, what: &str) -> Result<usize> {
    let t = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    t.parse::<usize>().map_err(|_| Error::parse(line, format!("bad {what} {t:?}")))
}

fn row(line: usize, toks: &[&str], n: Option<usize>, kind: RowKind) -> Result<EquationRow> {
    let n = n.ok_or_else(|| Error::parse(line, "equation row before `tetrahedra`"))?;
    if toks.len() != 2 * n + 1 {
        return Err(Error::parse(
            line,
            format!("expected {} integers ({} coefficient pairs and m), found {}", 2 * n + 1, n, toks.len()),
        ));
    }
    let v = ints(line, toks)?;
    Ok(EquationRow {
        a: (0..n).map(|i| v[2 * i]).collect(),
        b: (0..n).map(|i| v[2 * i + 1]).collect(),
        m: v[2 * n],
        kind,
    })
}

fn perm(line: usize, tok: &str) -> Result<[usize; 4]> {
    let digits: Vec<usize> = tok.chars().filter_map(|c| c.to_digit(10).map(|d| d as usize)).collect();
    let mut p = [0; 4];
    if digits.len() != 4 || tok.len() != 4 {
        return Err(Error::parse(line, format!("bad permutation {tok:?}")));
    }
    let mut seen = [false; 4];
    for (i, &d) in digits.iter().enumerate() {
        if d > 3 || seen[d] {
            return Err(Error::parse(line, format!("bad permutation {tok:?}")));
        }
        seen[d] = true;
        p[i] = d;
    }
    Ok(p)
}

fn cusp_slot(cusps: &mut Vec<PartialCusp>, k: usize) -> &mut PartialCusp {
    while cusps.len() <= k {
        cusps.push(PartialCusp::default());
    }
    &mut cusps[k]
}

/// Parses the line-oriented triangulation format (see README).
pub fn parse_triangulation(text: &str) -> Result<IdealTriangulation> {
    let mut name: Option<String> = None;
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut cusps: Vec<PartialCusp> = Vec::new();
    let mut base: Option<usize> = None;
    let mut tets: Vec<(usize, TetGluing)> = Vec::new();
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        last_line = ln;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "manifold" => {
                if toks.len() < 2 {
                    return Err(Error::parse(ln, "missing manifold name"));
                }
                name = Some(toks[1..].join(" "));
            }
            "tetrahedra" => {
                let k = index(ln, toks.get(1), "tetrahedron count")?;
                if k == 0 {
                    return Err(Error::parse(ln, "tetrahedron count must be positive"));
                }
                n = Some(k);
            }
            "edge" => edges.push(row(ln, &toks[1..], n, RowKind::Edge)?),
            "cusp" => {
                let k = index(ln, toks.get(1), "cusp index")?;
                let which = toks.get(2).copied().unwrap_or("");
                let r = row(ln, toks.get(3..).unwrap_or(&[]), n, RowKind::Completeness)?;
                let slot = cusp_slot(&mut cusps, k);
                let target = match which {
                    "meridian" => &mut slot.meridian,
                    "longitude" => &mut slot.longitude,
                    _ => return Err(Error::parse(ln, format!("expected meridian or longitude, found {which:?}"))),
                };
                if target.is_some() {
                    return Err(Error::parse(ln, format!("duplicate {which} row for cusp {k}")));
                }
                *target = Some(r);
            }
            "framing_shift" => {
                let k = index(ln, toks.get(1), "cusp index")?;
                let v = ints(ln, toks.get(2..3).unwrap_or(&[]))?;
                if v.len() != 1 || toks.len() != 3 {
                    return Err(Error::parse(ln, "expected `framing_shift <cusp> <s>`"));
                }
                cusp_slot(&mut cusps, k).framing_shift = Some(v[0]);
            }
            "filling" => {
                let k = index(ln, toks.get(1), "cusp index")?;
                let v = ints(ln, toks.get(2..).unwrap_or(&[]))?;
                if v.len() != 2 {
                    return Err(Error::parse(ln, "expected `filling <cusp> <p> <q>`"));
                }
                if v[0] == 0 && v[1] == 0 {
                    return Err(Error::parse(ln, "filling slope (0,0)"));
                }
                cusp_slot(&mut cusps, k).filling = Some((v[0], v[1]));
            }
            "drilled" => {
                let k = index(ln, toks.get(1), "cusp index")?;
                cusp_slot(&mut cusps, k).drilled = true;
            }
            "base" => base = Some(index(ln, toks.get(1), "base tetrahedron")?),
            "tet" => {
                if toks.len() != 17 || toks[2] != "neighbors" || toks[7] != "gluings" || toks[12] != "generators" {
                    return Err(Error::parse(
                        ln,
                        "expected `tet <i> neighbors n0 n1 n2 n3 gluings p0 p1 p2 p3 generators g0 g1 g2 g3`",
                    ));
                }
                let t = index(ln, toks.get(1), "tetrahedron index")?;
                let nb = ints(ln, &toks[3..7])?;
                let mut neighbors = [0usize; 4];
                for (f, &x) in nb.iter().enumerate() {
                    if x < 0 {
                        return Err(Error::parse(ln, "negative neighbor"));
                    }
                    neighbors[f] = x as usize;
                }
                let mut gluings = [[0usize; 4]; 4];
                for f in 0..4 {
                    gluings[f] = perm(ln, toks[8 + f])?;
                }
                let g = ints(ln, &toks[13..17])?;
                let generators = [g[0] as i32, g[1] as i32, g[2] as i32, g[3] as i32];
                tets.push((t, TetGluing { neighbors, gluings, generators }));
            }
            "peripheral" => {
                let k = index(ln, toks.get(1), "cusp index")?;
                if toks.len() != 4 {
                    return Err(Error::parse(ln, "expected `peripheral <cusp> meridian|longitude <word>`"));
                }
                super::words::parse_word(toks[3]).map_err(|e| Error::parse(ln, e.to_string()))?;
                let slot = cusp_slot(&mut cusps, k);
                match toks[2] {
                    "meridian" => slot.peri_meridian = Some(toks[3].to_string()),
                    "longitude" => slot.peri_longitude = Some(toks[3].to_string()),
                    w => return Err(Error::parse(ln, format!("expected meridian or longitude, found {w:?}"))),
                }
            }
            other => return Err(Error::parse(ln, format!("unknown keyword {other:?}"))),
        }
    }

    let end = last_line.max(1);
    let n = n.ok_or_else(|| Error::parse(end, "missing `tetrahedra` line (empty input?)"))?;
    if edges.len() != n {
        return Err(Error::parse(end, format!("expected {n} edge rows, found {}", edges.len())));
    }
    if cusps.is_empty() {
        return Err(Error::parse(end, "no cusp rows"));
    }
    let mut out_cusps = Vec::new();
    for (k, c) in cusps.into_iter().enumerate() {
        let meridian = c.meridian.ok_or_else(|| Error::parse(end, format!("cusp {k} has no meridian row")))?;
        let longitude = c.longitude.ok_or_else(|| Error::parse(end, format!("cusp {k} has no longitude row")))?;
        let peripheral = match (c.peri_meridian, c.peri_longitude) {
            (Some(m), Some(l)) => Some((m, l)),
            (None, None) => None,
            _ => return Err(Error::parse(end, format!("cusp {k} needs both peripheral words"))),
        };
        out_cusps.push(Cusp {
            meridian,
            longitude,
            framing_shift: c.framing_shift,
            filling: c.filling,
            drilled: c.drilled,
            peripheral,
        });
    }
    let combinatorics = if tets.is_empty() {
        None
    } else {
        if tets.len() != n {
            return Err(Error::parse(end, format!("expected {n} `tet` lines, found {}", tets.len())));
        }
        tets.sort_by_key(|(i, _)| *i);
        if tets.iter().enumerate().any(|(i, (t, _))| i != *t) {
            return Err(Error::parse(end, "tet indices must be 0..n-1"));
        }
        let tets: Vec<TetGluing> = tets.into_iter().map(|(_, t)| t).collect();
        if tets.iter().flat_map(|t| t.neighbors).any(|x| x >= n) {
            return Err(Error::parse(end, "neighbor index out of range"));
        }
        let base = base.ok_or_else(|| Error::parse(end, "`tet` lines need a `base` line"))?;
        if base >= n {
            return Err(Error::parse(end, "base tetrahedron out of range"));
        }
        Some(Combinatorics { base, tets })
    };
    Ok(IdealTriangulation { name: name.unwrap_or_else(|| "unnamed".into()), n, edges, cusps: out_cusps, combinatorics })
}

/// Parses complex literals such as `1.5`, `-2i`, `i`, `0.25-3e-2i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("malformed complex literal {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // find the split between real and imaginary parts
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        if !re.is_finite() || !im.is_finite() {
            return Err(bad());
        }
        Ok(C64::new(re, im))
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        if !re.is_finite() {
            return Err(bad());
        }
        Ok(C64::new(re, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG8: &str = "manifold fig8\ntetrahedra 2\nedge 2 -1 2 -1 0\nedge -2 1 -2 1 4\n\
        cusp 0 meridian 1 0 1 -1 -1\ncusp 0 longitude 0 0 4 -2 -2\n";

    #[test]
    fn parses_minimal_file() {
        let t = parse_triangulation(FIG8).unwrap();
        assert_eq!(t.n, 2);
        assert_eq!(t.num_cusps(), 1);
        assert_eq!(t.edges[1].m, 4);
        assert_eq!(t.cusps[0].longitude.a, vec![0, 4]);
        assert!(t.combinatorics.is_none());
    }

    #[test]
    fn filling_line() {
        let text = format!("{FIG8}cusp 1 meridian 0 0 0 0 0\ncusp 1 longitude 0 0 0 0 0\nfilling 1 1 3\n");
        let t = parse_triangulation(&text).unwrap();
        assert_eq!(t.cusps[1].filling, Some((1, 3)));
        assert_eq!(t.cusps[0].filling, None);
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_triangulation(""), Err(Error::Parse { .. })));
        let bad = FIG8.replace("edge 2 -1 2 -1 0", "edge 2 -1 2 0");
        assert!(matches!(parse_triangulation(&bad), Err(Error::Parse { line: 3, .. })));
        let bad = FIG8.replace("edge -2 1 -2 1 4\n", "");
        assert!(parse_triangulation(&bad).is_err());
        let bad = format!("{FIG8}frobnicate 3\n");
        assert!(matches!(parse_triangulation(&bad), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("0.25-3e-2i").unwrap(), C64::new(0.25, -0.03));
        assert_eq!(parse_complex("1e-3+1E+2i").unwrap(), C64::new(1e-3, 100.0));
        assert!(parse_complex("1+2").is_err());
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }
}
