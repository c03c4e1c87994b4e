//! Bit-exact binary persistence for purification states.
//!
//! Format (little-endian throughout):
//!
//! ```text
//! magic  [u8; 8] = "TFDCKPT\x01"
//! model_id      : u32 length + UTF-8 bytes
//! beta          : f64
//! plan_hash     : u64
//! d             : u32
//! sites         : u32
//! log_norm      : f64
//! per site      : left u32, right u32, data (left*q*right f64)
//! per bond      : count u32, weights (f64)
//! ```
//!
//! Floats are stored as raw IEEE-754 bits, so a write/read cycle
//! reproduces the state exactly.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mps::{replace_site, PurificationMPS};

const MAGIC: &[u8; 8] = b"TFDCKPT\x01";

/// Provenance recorded alongside the state.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub model_id: String,
    pub beta: f64,
    pub plan_hash: u64,
}

pub fn save(path: &Path, state: &PurificationMPS, prov: &Provenance) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(MAGIC)?;
    write_str(&mut f, &prov.model_id)?;
    f.write_all(&prov.beta.to_le_bytes())?;
    f.write_all(&prov.plan_hash.to_le_bytes())?;
    f.write_all(&(state.local_dim() as u32).to_le_bytes())?;
    f.write_all(&(state.len() as u32).to_le_bytes())?;
    f.write_all(&state.log_norm().to_le_bytes())?;
    for t in &state.tensors {
        f.write_all(&(t.left as u32).to_le_bytes())?;
        f.write_all(&(t.right as u32).to_le_bytes())?;
        for x in &t.data {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    for w in &state.spectra {
        f.write_all(&(w.len() as u32).to_le_bytes())?;
        for x in w {
            f.write_all(&x.to_le_bytes())?;
        }
    }
    f.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(PurificationMPS, Provenance)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let model_id = read_str(&mut f)?;
    let beta = read_f64(&mut f)?;
    let plan_hash = read_u64(&mut f)?;
    let d = read_u32(&mut f)? as usize;
    let sites = read_u32(&mut f)? as usize;
    let log_norm = read_f64(&mut f)?;
    if d < 2 || sites < 2 {
        return Err(Error::Format("corrupt header".into()));
    }
    let q = d * d;
    let mut state = PurificationMPS::infinite_temperature(d, sites)?;
    for i in 0..sites {
        let left = read_u32(&mut f)? as usize;
        let right = read_u32(&mut f)? as usize;
        let n = left
            .checked_mul(q)
            .and_then(|v| v.checked_mul(right))
            .ok_or_else(|| Error::Format("corrupt tensor shape".into()))?;
        let mut data = vec![0.0; n];
        for x in data.iter_mut() {
            *x = read_f64(&mut f)?;
        }
        state.tensors[i] = replace_site(left, right, data);
    }
    for i in 0..sites - 1 {
        let n = read_u32(&mut f)? as usize;
        let mut w = vec![0.0; n];
        for x in w.iter_mut() {
            *x = read_f64(&mut f)?;
        }
        state.spectra[i] = w;
    }
    state.set_log_norm(log_norm);
    state.set_loose();
    Ok((state, Provenance { model_id, beta, plan_hash }))
}

fn write_str(f: &mut impl Write, s: &str) -> Result<()> {
    f.write_all(&(s.len() as u32).to_le_bytes())?;
    f.write_all(s.as_bytes())?;
    Ok(())
}

fn read_str(f: &mut impl Read) -> Result<String> {
    let n = read_u32(f)? as usize;
    if n > 1 << 16 {
        return Err(Error::Format("unreasonable string length".into()));
    }
    let mut buf = vec![0u8; n];
    f.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Format("invalid UTF-8 in model id".into()))
}

fn read_u32(f: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    f.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(f: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    f.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(f: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    f.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("tfd_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("state.ckpt");

        let n = 4usize.pow(4);
        let mut v: Vec<f64> = (0..n).map(|i| (((i * 40503) % 65537) as f64 / 65537.0) - 0.5).collect();
        let nrm = crate::linalg::norm2(&v);
        for x in v.iter_mut() {
            *x /= nrm;
        }
        let state = PurificationMPS::from_dense(2, 4, &v, None, 1e-14).unwrap();
        let prov = Provenance { model_id: "test_model_L4".into(), beta: 1.25, plan_hash: 0xdeadbeef };
        save(&path, &state, &prov).unwrap();
        let (loaded, lprov) = load(&path).unwrap();
        assert_eq!(prov, lprov);
        assert_eq!(state.log_norm().to_bits(), loaded.log_norm().to_bits());
        assert_eq!(state.len(), loaded.len());
        for (a, b) in state.tensors.iter().zip(&loaded.tensors) {
            assert_eq!(a.left, b.left);
            assert_eq!(a.right, b.right);
            for (x, y) in a.data.iter().zip(&b.data) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = std::env::temp_dir().join("tfd_ckpt_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("garbage.ckpt");
        std::fs::write(&path, b"NOTACKPT plus junk").unwrap();
        assert!(matches!(load(&path), Err(Error::Format(_))));
        std::fs::remove_file(&path).unwrap();
    }
}
