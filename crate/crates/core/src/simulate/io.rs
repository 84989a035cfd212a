//! PathSet serialization.
//!
//! CSV: header `path_id,step,t,x,y,sigma,integrated_var`, one row per recorded
//! point, path-major. Floats are written in shortest round-trip form.
//!
//! Binary (all little-endian):
//!
//! ```text
//! magic            8 bytes  "SVLABPS\0"
//! version          u32      1
//! model kind       u32      0 = vasicek, 1 = heston, 2 = exp_ou
//! alpha m k rho mu y0 s0    7 × f64
//! dt               f64
//! n_steps n_paths seed record_stride   4 × u64
//! x, y, integrated_var      3 × (n_paths · n_recorded) × f64, path-major
//! ```

use std::io::{BufRead, Read, Write};

use super::{PathConfig, PathSet};
use crate::error::{Error, Result};
use crate::model::{ModelKind, ModelParams};
use crate::textfmt::fmt_f64;

pub const PATHSET_MAGIC: &[u8; 8] = b"SVLABPS\0";
pub const PATHSET_VERSION: u32 = 1;

const CSV_HEADER: &str = "path_id,step,t,x,y,sigma,integrated_var";

impl PathSet {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for path in 0..self.n_paths() {
            let (x, y, iv) = (self.x(path), self.y(path), self.integrated_var(path));
            let sigma = self.sigma(path);
            for i in 0..self.n_recorded() {
                writeln!(
                    w,
                    "{path},{},{},{},{},{},{}",
                    self.step_of(i),
                    fmt_f64(self.time_of(i)),
                    fmt_f64(x[i]),
                    fmt_f64(y[i]),
                    fmt_f64(sigma[i]),
                    fmt_f64(iv[i]),
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV layout back. Parameters and configuration are not part
    /// of the CSV and come from the run manifest.
    pub fn read_csv<R: BufRead>(r: R, params: ModelParams, config: PathConfig) -> Result<Self> {
        let n_rec = config.n_recorded();
        let len = config.n_paths * n_rec;
        let (mut x, mut y, mut iv) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        let mut seen = 0usize;
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(Error::Format(format!("expected header '{CSV_HEADER}'"))),
        }
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = lineno + 2;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 7 {
                return Err(Error::Format(format!("line {row}: expected 7 columns")));
            }
            let bad = |c: &str| Error::Format(format!("line {row}: cannot parse '{c}'"));
            let path: usize = cols[0].parse().map_err(|_| bad(cols[0]))?;
            let step: usize = cols[1].parse().map_err(|_| bad(cols[1]))?;
            if path >= config.n_paths || !step.is_multiple_of(config.record_stride) || step / config.record_stride >= n_rec {
                return Err(Error::Format(format!("line {row}: (path {path}, step {step}) out of range")));
            }
            let idx = path * n_rec + step / config.record_stride;
            let f = |c: &str| c.parse::<f64>().map_err(|_| bad(c));
            x[idx] = f(cols[3])?;
            y[idx] = f(cols[4])?;
            iv[idx] = f(cols[6])?;
            seen += 1;
        }
        if seen != len {
            return Err(Error::Format(format!("expected {len} rows, found {seen}")));
        }
        PathSet::from_parts(config, params, x, y, iv)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.params();
        let c = self.config();
        w.write_all(PATHSET_MAGIC)?;
        w.write_all(&PATHSET_VERSION.to_le_bytes())?;
        let kind: u32 = match p.kind {
            ModelKind::Vasicek => 0,
            ModelKind::Heston => 1,
            ModelKind::ExpOu => 2,
        };
        w.write_all(&kind.to_le_bytes())?;
        for v in [p.alpha, p.m, p.k, p.rho, p.mu, p.y0, p.s0, c.dt] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in [c.n_steps as u64, c.n_paths as u64, c.seed, c.record_stride as u64] {
            w.write_all(&v.to_le_bytes())?;
        }
        for col in [&self.x, &self.y, &self.integrated_var] {
            for v in col.iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != PATHSET_MAGIC {
            return Err(Error::Format("bad magic, not a path-set dump".into()));
        }
        let version = read_u32(&mut r)?;
        if version != PATHSET_VERSION {
            return Err(Error::Format(format!("unsupported path-set version {version}")));
        }
        let kind = match read_u32(&mut r)? {
            0 => ModelKind::Vasicek,
            1 => ModelKind::Heston,
            2 => ModelKind::ExpOu,
            other => return Err(Error::Format(format!("unknown model tag {other}"))),
        };
        let mut f = [0.0; 8];
        for v in f.iter_mut() {
            *v = read_f64(&mut r)?;
        }
        let params = ModelParams {
            kind,
            alpha: f[0],
            m: f[1],
            k: f[2],
            rho: f[3],
            mu: f[4],
            y0: f[5],
            s0: f[6],
        };
        let config = PathConfig {
            dt: f[7],
            n_steps: read_u64(&mut r)? as usize,
            n_paths: read_u64(&mut r)? as usize,
            seed: read_u64(&mut r)?,
            record_stride: read_u64(&mut r)? as usize,
        };
        config.validate(&params)?;
        let len = config.n_paths * config.n_recorded();
        let mut cols = Vec::with_capacity(3);
        for _ in 0..3 {
            let mut buf = vec![0u8; len * 8];
            r.read_exact(&mut buf)?;
            cols.push(
                buf.chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
                    .collect::<Vec<_>>(),
            );
        }
        let iv = cols.pop().expect("three columns");
        let y = cols.pop().expect("three columns");
        let x = cols.pop().expect("three columns");
        PathSet::from_parts(config, params, x, y, iv)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::simulate_paths;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn csv_and_binary_round_trip(
            seed in any::<u64>(),
            kind in 0usize..3,
            n_paths in 1usize..4,
            n_steps in 1usize..40,
            stride in 1usize..5,
        ) {
            let params = [
                ModelParams::vasicek(1.0, 0.2, 0.3, -0.5),
                ModelParams::heston(2.0, 0.04, 0.5, -0.3),
                ModelParams::exp_ou(0.5, 0.4, 0.2),
            ][kind];
            let cfg = PathConfig::new(0.01, n_steps, n_paths, seed).with_stride(stride);
            let ps = simulate_paths(&params, &cfg).unwrap();

            let mut csv = Vec::new();
            ps.write_csv(&mut csv).unwrap();
            let back = PathSet::read_csv(csv.as_slice(), params, cfg).unwrap();
            prop_assert_eq!(&back, &ps);

            let mut bin = Vec::new();
            ps.write_binary(&mut bin).unwrap();
            prop_assert_eq!(&bin[..8], PATHSET_MAGIC);
            let back = PathSet::read_binary(bin.as_slice()).unwrap();
            prop_assert_eq!(&back, &ps);
        }
    }

    #[test]
    fn rejects_foreign_data() {
        assert!(PathSet::read_binary(&b"NOTAPATHSETATALL"[..]).is_err());
        let cfg = PathConfig::new(0.1, 2, 1, 0);
        let p = ModelParams::vasicek(1.0, 0.2, 0.1, 0.0);
        assert!(PathSet::read_csv(&b"a,b\n"[..], p, cfg).is_err());
        let short = format!("{CSV_HEADER}\n0,0,0,0,0.2,0.2,0\n");
        assert!(PathSet::read_csv(short.as_bytes(), p, cfg).is_err());
    }
}
