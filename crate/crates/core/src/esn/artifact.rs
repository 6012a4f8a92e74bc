//! Plain-text weight files.
//!
//! ```text
//! esn-weights 1
//! <n_in> <n_res> <n_out>
//! w_in            n_res rows of n_in values
//! w_res           n_res rows of n_res values
//! out_mask        n_out rows of n_res characters, '1' kept, '0' masked
//! w_out           n_out rows of n_res + 1 values, bias last
//! ```
//!
//! Values are whitespace separated and written in shortest round-trip form,
//! so a file read back reproduces the weights bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{EsnWeights, SparseMatrix};
use crate::error::{Error, Result};

const MAGIC: &str = "esn-weights 1";

pub fn weights_to_string(w: &EsnWeights) -> String {
    let (n_in, n_res, n_out) = (w.n_in(), w.n_res(), w.n_out);
    let mut s = format!("{MAGIC}\n{n_in} {n_res} {n_out}\n");
    let mut rows = |name: &str, values: &[f64], width: usize| {
        s.push_str(name);
        s.push('\n');
        for row in values.chunks(width) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
    };
    rows("w_in", &w.w_in.to_dense(), n_in);
    rows("w_res", &w.w_res.to_dense(), n_res);
    s.push_str("out_mask\n");
    for r in 0..n_out {
        for &m in w.mask_row(r) {
            s.push(if m { '1' } else { '0' });
        }
        s.push('\n');
    }
    s.push_str("w_out\n");
    for r in 0..n_out {
        let line: Vec<String> = w.w_out_row(r).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| bad(format!("file ends before {what}")))
    }

    fn header(&mut self, name: &str) -> Result<()> {
        let (ln, head) = self.next(name)?;
        if head.trim() != name {
            return Err(bad(format!("line {ln}: expected section '{name}'")));
        }
        Ok(())
    }

    fn section(&mut self, name: &str, n_rows: usize, width: usize) -> Result<Vec<f64>> {
        self.header(name)?;
        let mut values = Vec::with_capacity(n_rows * width);
        for _ in 0..n_rows {
            let (ln, line) = self.next(name)?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(format!("line {ln}: bad value '{t}'"))))
                .collect::<Result<_>>()?;
            if row.len() != width {
                return Err(bad(format!("line {ln}: {} values, expected {width}", row.len())));
            }
            values.extend(row);
        }
        Ok(values)
    }
}

fn bad(msg: String) -> Error {
    Error::ArtifactParse(msg)
}

pub fn weights_from_str(text: &str) -> Result<EsnWeights> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, magic) = lines.next("header")?;
    if magic.trim() != MAGIC {
        return Err(bad(format!("expected '{MAGIC}', found '{magic}'")));
    }
    let (ln, dims) = lines.next("dimensions")?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("line {ln}: bad dimension '{t}'"))))
        .collect::<Result<_>>()?;
    let [n_in, n_res, n_out] = dims[..] else {
        return Err(bad(format!("line {ln}: expected three dimensions")));
    };

    let w_in = lines.section("w_in", n_res, n_in)?;
    let w_res = lines.section("w_res", n_res, n_res)?;
    lines.header("out_mask")?;
    let mut out_mask = Vec::with_capacity(n_out * n_res);
    for _ in 0..n_out {
        let (ln, line) = lines.next("out_mask")?;
        let line = line.trim();
        if line.len() != n_res {
            return Err(bad(format!("line {ln}: mask row of {} entries, expected {n_res}", line.len())));
        }
        for c in line.chars() {
            out_mask.push(match c {
                '1' => true,
                '0' => false,
                _ => return Err(bad(format!("line {ln}: mask character '{c}'"))),
            });
        }
    }
    let w_out = lines.section("w_out", n_out, n_res + 1)?;

    Ok(EsnWeights {
        w_in: SparseMatrix::from_dense(n_res, n_in, &w_in),
        w_res: SparseMatrix::from_dense(n_res, n_res, &w_res),
        out_mask,
        w_out,
        n_out,
    })
}

pub fn write_weights(w: &EsnWeights, path: &Path) -> Result<()> {
    std::fs::write(path, weights_to_string(w)).map_err(|e| Error::io(path, e))
}

pub fn read_weights(path: &Path) -> Result<EsnWeights> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    weights_from_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esn::{init_weights, EsnConfig, EsnParams, ReadoutMask};
    use crate::link_sim::LinkParams;
    use crate::rng::{substream, WEIGHTS_STREAM};

    fn weights() -> EsnWeights {
        let params = EsnParams {
            readout_mask: ReadoutMask::Bernoulli,
            s_out: 0.5,
            ..EsnParams::default()
        };
        let cfg = EsnConfig::new(params, 3, &LinkParams::default(), 1);
        let mut w = init_weights(&cfg, &mut substream(1, WEIGHTS_STREAM)).unwrap();
        for (i, v) in w.w_out.iter_mut().enumerate() {
            *v = (i as f64).sqrt() / 7.0;
        }
        w
    }

    #[test]
    fn round_trip_is_exact() {
        let w = weights();
        let back = weights_from_str(&weights_to_string(&w)).unwrap();
        assert_eq!(back, w);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        write_weights(&w, &path).unwrap();
        assert_eq!(read_weights(&path).unwrap(), w);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let good = weights_to_string(&weights());
        assert!(weights_from_str("").is_err());
        assert!(weights_from_str(&good.replacen("esn-weights 1", "esn-weights 2", 1)).is_err());
        let truncated: String = good.lines().take(20).map(|l| format!("{l}\n")).collect();
        assert!(weights_from_str(&truncated).is_err());
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        let at = lines.iter().position(|l| l == "out_mask").unwrap() + 1;
        lines[at].replace_range(0..1, "x");
        assert!(matches!(
            weights_from_str(&lines.join("\n")),
            Err(Error::ArtifactParse(_))
        ));
    }
}
