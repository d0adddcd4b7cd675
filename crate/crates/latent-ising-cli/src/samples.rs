//! Plain-text sample files: one row per sample, spins `1` or `-1` separated
//! by blanks. Lines starting with `#` are comments; the writer puts a
//! `# n=<n> m=<m>` header first.

use std::io::{self, BufRead, Write};

use latent_ising::{Error, SampleMatrix};

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Domain(#[from] Error),
}

pub fn read<R: BufRead>(input: R) -> Result<SampleMatrix, ReadError> {
    let mut n = None;
    let mut data = Vec::new();
    let mut row = 0;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut width = 0;
        for (col, tok) in line.split_whitespace().enumerate() {
            let spin = match tok {
                "1" | "+1" => 1,
                "-1" => -1,
                _ => {
                    let value = tok.parse::<i64>().unwrap_or(i64::MIN);
                    return Err(Error::BadSpinValue { row, col, value }.into());
                }
            };
            data.push(spin);
            width += 1;
        }
        match n {
            None => n = Some(width),
            Some(w) if w != width => return Err(Error::DimensionMismatch { expected: w, found: width }.into()),
            _ => {}
        }
        row += 1;
    }
    match n {
        None => Err(Error::EmptySample.into()),
        Some(n) => Ok(SampleMatrix::new(n, data)?),
    }
}

pub fn write<W: Write>(mut out: W, samples: &SampleMatrix) -> io::Result<()> {
    writeln!(out, "# n={} m={}", samples.n(), samples.m())?;
    let mut line = String::with_capacity(3 * samples.n());
    for row in samples.rows() {
        line.clear();
        for (k, &s) in row.iter().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            line.push_str(if s > 0 { "1" } else { "-1" });
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = SampleMatrix::new(3, vec![1, -1, 1, -1, -1, 1]).unwrap();
        let mut buf = Vec::new();
        write(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# n=3 m=2\n1 -1 1\n-1 -1 1\n");
        assert_eq!(read(&buf[..]).unwrap(), s);
    }

    #[test]
    fn errors() {
        let code = |text: &str| match read(text.as_bytes()) {
            Err(ReadError::Domain(e)) => e.code(),
            other => panic!("{other:?}"),
        };
        assert_eq!(code("# nothing\n"), "EmptySample");
        assert_eq!(code("1 -1\n1 0\n"), "BadSpinValue");
        assert_eq!(code("1 -1\n1\n"), "DimensionMismatch");
    }
}
