use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use super::{FormKind, PrimeEigenvalueTable};
use crate::error::{Error, Result};

pub const CACHE_MAGIC: &[u8; 4] = b"HSGN";
pub const CACHE_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 1 + 2 + 8;

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub fn encode(table: &PrimeEigenvalueTable) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(HEADER_LEN + table.len() * 24 + 8);
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.push(table.kind.tag());
    let weight = u16::try_from(table.weight).map_err(|_| Error::param("weight exceeds u16"))?;
    buf.extend_from_slice(&weight.to_le_bytes());
    buf.extend_from_slice(&table.limit.to_le_bytes());
    for e in table.entries() {
        buf.extend_from_slice(&e.p.to_le_bytes());
        buf.extend_from_slice(&e.lambda.to_bits().to_le_bytes());
        match e.exact {
            Some(a) => {
                let bytes = a.to_signed_bytes_le();
                let len = u16::try_from(bytes.len()).map_err(|_| Error::param("exact value too long"))?;
                buf.push(1);
                buf.extend_from_slice(&len.to_le_bytes());
                buf.extend_from_slice(&bytes);
            }
            None => buf.push(0),
        }
    }
    let sum = checksum(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(out)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u16(&mut self) -> Option<u16> {
        self.take(2).map(|b| u16::from_le_bytes(b.try_into().unwrap()))
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<PrimeEigenvalueTable> {
    let corrupt = |reason: &str| Error::CorruptCache {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN + 8 {
        return Err(corrupt("file too short"));
    }
    if &bytes[..4] != CACHE_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    let mut r = Reader { buf: body, pos: 4 };
    let version = r.u16().unwrap();
    if version != CACHE_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    if checksum(body) != u64::from_le_bytes(trailer.try_into().unwrap()) {
        return Err(corrupt("checksum mismatch"));
    }
    let kind = FormKind::from_tag(r.u8().unwrap()).ok_or_else(|| corrupt("unknown form kind"))?;
    let weight = r.u16().unwrap() as u32;
    let limit = r.u64().unwrap();

    let mut primes = Vec::new();
    let mut lambdas = Vec::new();
    let mut exact: Vec<BigInt> = Vec::new();
    let mut with_exact = None;
    while r.pos < body.len() {
        let rec = (|| {
            let p = r.u64()?;
            let l = f64::from_bits(r.u64()?);
            let has = r.u8()?;
            let e = match has {
                0 => None,
                1 => {
                    let len = r.u16()? as usize;
                    Some(BigInt::from_signed_bytes_le(r.take(len)?))
                }
                _ => return None,
            };
            Some((p, l, e))
        })()
        .ok_or_else(|| corrupt("truncated record"))?;
        let (p, l, e) = rec;
        if *with_exact.get_or_insert(e.is_some()) != e.is_some() {
            return Err(corrupt("mixed exact and inexact records"));
        }
        if primes.last().is_some_and(|&q| q >= p) || p > limit {
            return Err(corrupt("records out of order"));
        }
        primes.push(p);
        lambdas.push(l);
        exact.extend(e);
    }
    let exact = with_exact.unwrap_or(false).then_some(exact);
    PrimeEigenvalueTable::from_parts(kind, weight, limit, primes, lambdas, exact, "cache file")
}

/// Atomically replace `path`, holding an advisory lock on `<path>.lock`.
pub fn write_cache(path: &Path, table: &PrimeEigenvalueTable) -> Result<()> {
    let bytes = encode(table)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let lock = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(path.with_extension("lock"))?;
    lock.lock()?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    lock.unlock()?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<PrimeEigenvalueTable> {
    let bytes = fs::read(path)?;
    decode(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{cm_prime_table, delta_prime_table, satotate_sample};

    fn same(a: &PrimeEigenvalueTable, b: &PrimeEigenvalueTable) {
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.weight, b.weight);
        assert_eq!(a.limit, b.limit);
        assert_eq!(a.primes(), b.primes());
        assert_eq!(
            a.lambdas().iter().map(|l| l.to_bits()).collect::<Vec<_>>(),
            b.lambdas().iter().map(|l| l.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.exact_values(), b.exact_values());
    }

    #[test]
    fn roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        for t in [
            delta_prime_table(2000).unwrap(),
            cm_prime_table(2000).unwrap(),
            satotate_sample(4, 2000).unwrap(),
        ] {
            let path = dir.path().join(format!("{}.hsgn", t.kind));
            write_cache(&path, &t).unwrap();
            same(&t, &read_cache(&path).unwrap());
        }
    }

    #[test]
    fn rejects_damage() {
        let t = delta_prime_table(500).unwrap();
        let bytes = encode(&t).unwrap();
        let p = Path::new("x");
        assert!(decode(&bytes[..bytes.len() - 3], p).is_err());
        assert!(decode(&bytes[..10], p).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad, p).unwrap_err().to_string().contains("magic"));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode(&bad, p).unwrap_err().to_string().contains("version"));
        let mut bad = bytes.clone();
        bad[40] ^= 1;
        assert!(decode(&bad, p).unwrap_err().to_string().contains("checksum"));
    }
}
