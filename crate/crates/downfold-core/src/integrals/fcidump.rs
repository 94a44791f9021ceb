//! FCIDUMP reader and writer.
//!
//! Records are `value i j k l` with 1-based indices and chemist-notation
//! `(ij|kl)` two-electron values. `k = l = 0` marks one-electron records,
//! all-zero indices the core energy, and `i j k l = p 0 0 0` an orbital energy.

use super::{fock_matrix, MolecularSystem, OneBodyTensor, TwoBodyTensor};
use crate::error::{Error, Result};
use crate::tensor::Tensor4;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;
use nalgebra::DMatrix;

/// Parsed contents of an FCIDUMP file.
#[derive(Debug, Clone, PartialEq)]
pub struct FcidumpData {
    pub system: MolecularSystem,
    pub h1: OneBodyTensor,
    pub h2: TwoBodyTensor,
    pub core_energy: f64,
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    orbsym: Vec<u32>,
    isym: u32,
}

fn parse_header(text: &str) -> Result<Header> {
    let body = text.trim_start();
    let body = body
        .get(..4)
        .filter(|s| s.eq_ignore_ascii_case("&FCI"))
        .map(|_| &body[4..])
        .ok_or_else(|| Error::Header("missing &FCI".into()))?;
    let mut norb = None;
    let mut nelec = None;
    let mut ms2 = 0i32;
    let mut orbsym = Vec::new();
    let mut isym = 1u32;
    let mut key = String::new();
    for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let (k, v) = match tok.split_once('=') {
            Some((k, v)) => {
                key = k.trim().to_ascii_uppercase();
                (key.as_str(), v.trim())
            }
            None => (key.as_str(), tok),
        };
        if v.is_empty() {
            continue;
        }
        let int = |v: &str| v.parse::<i64>().map_err(|_| Error::Header(format!("bad value {v:?} for {k}")));
        match k {
            "NORB" => norb = Some(int(v)?),
            "NELEC" => nelec = Some(int(v)?),
            "MS2" => ms2 = int(v)? as i32,
            "ORBSYM" => orbsym.push(int(v)? as u32),
            "ISYM" => isym = int(v)? as u32,
            "UHF" if v.eq_ignore_ascii_case(".TRUE.") || v.eq_ignore_ascii_case("TRUE") => {
                return Err(Error::Unsupported("UHF integrals".into()))
            }
            _ => {}
        }
    }
    let norb = norb.filter(|&n| n > 0).ok_or_else(|| Error::Header("NORB missing or not positive".into()))?;
    let nelec = nelec.filter(|&n| n >= 0).ok_or_else(|| Error::Header("NELEC missing".into()))?;
    if ms2 != 0 {
        return Err(Error::Unsupported(format!("MS2={ms2} (closed-shell only)")));
    }
    let norb = norb as usize;
    if orbsym.is_empty() {
        orbsym = alloc::vec![1; norb];
    } else if orbsym.len() != norb {
        return Err(Error::Header(format!("ORBSYM has {} entries, expected {norb}", orbsym.len())));
    }
    Ok(Header { norb, nelec: nelec as usize, ms2, orbsym, isym })
}

/// Parse FCIDUMP text into a system description and integral tensors.
pub fn parse_fcidump(text: &str) -> Result<FcidumpData> {
    let lower_end = ["&END", "/"];
    let mut header = String::new();
    let mut lines = text.lines().enumerate();
    let mut closed = false;
    for (_, line) in lines.by_ref() {
        let t = line.trim();
        if let Some(pos) = lower_end.iter().filter_map(|m| t.to_ascii_uppercase().find(m)).min() {
            header.push_str(&t[..pos]);
            closed = true;
            break;
        }
        header.push_str(t);
        header.push(' ');
    }
    if !closed {
        return Err(Error::Header("namelist not terminated by &END or /".into()));
    }
    let h = parse_header(&header)?;
    let n = h.norb;
    let mut eri = Tensor4::zeros(n);
    let mut h1 = DMatrix::<f64>::zeros(n, n);
    let mut core = 0.0;
    let mut orb_e: Vec<Option<f64>> = alloc::vec![None; n];
    for (lineno, line) in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let mut it = t.split_whitespace();
        let rec_err = |msg: &str| Error::Record { line: lineno + 1, msg: msg.to_string() };
        let val: f64 = it
            .next()
            .and_then(|v| v.replace(['D', 'd'], "e").parse().ok())
            .ok_or_else(|| rec_err("bad value"))?;
        let mut idx = [0usize; 4];
        for slot in &mut idx {
            *slot = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| rec_err("expected four indices"))?;
        }
        if it.next().is_some() {
            return Err(rec_err("trailing fields"));
        }
        for &x in &idx {
            if x > n {
                return Err(Error::IndexRange { index: x, norb: n });
            }
        }
        match idx {
            [0, 0, 0, 0] => core = val,
            [i, 0, 0, 0] => orb_e[i - 1] = Some(val),
            [i, j, 0, 0] if j > 0 => {
                h1[(i - 1, j - 1)] = val;
                h1[(j - 1, i - 1)] = val;
            }
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                for (a, b, c, d) in [(p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r)] {
                    eri[[a, b, c, d]] = val;
                    eri[[c, d, a, b]] = val;
                }
            }
            _ => return Err(rec_err("index pattern not recognised")),
        }
    }
    let h1 = OneBodyTensor { h1 };
    let h2 = TwoBodyTensor::from_chemist(&eri);
    let mo_energies: Vec<f64> = if orb_e.iter().all(Option::is_some) {
        orb_e.into_iter().flatten().collect()
    } else {
        let occ: Vec<usize> = (0..(h.nelec / 2).min(n)).collect();
        let f = fock_matrix(&h1, &h2, &occ);
        (0..n).map(|p| f[(p, p)]).collect()
    };
    if h.nelec > 2 * n {
        return Err(Error::Header(format!("NELEC={} exceeds 2*NORB", h.nelec)));
    }
    let mut system = MolecularSystem::new(n, h.nelec, mo_energies)?;
    system.ms2 = h.ms2;
    system.orbsym = h.orbsym;
    system.isym = h.isym;
    Ok(FcidumpData { system, h1, h2, core_energy: core })
}

/// Serialize to FCIDUMP text: unique non-zero records, 17 significant digits.
pub fn write_fcidump(data: &FcidumpData) -> String {
    let sys = &data.system;
    let n = sys.n_spatial;
    let mut out = String::new();
    let _ = writeln!(out, " &FCI NORB={n},NELEC={},MS2={},", sys.n_electrons, sys.ms2);
    let _ = write!(out, "  ORBSYM=");
    for s in &sys.orbsym {
        let _ = write!(out, "{s},");
    }
    let _ = writeln!(out, "\n  ISYM={},\n &END", sys.isym);
    let pair = |a: usize, b: usize| a * (a + 1) / 2 + b;
    for i in 0..n {
        for j in 0..=i {
            for k in 0..n {
                for l in 0..=k {
                    if pair(k, l) > pair(i, j) {
                        continue;
                    }
                    let v = data.h2.chemist(i, j, k, l);
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.16e} {} {} {} {}", i + 1, j + 1, k + 1, l + 1);
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..=i {
            let v = data.h1.h1[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:.16e} {} {} 0 0", i + 1, j + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.16e} 0 0 0 0", data.core_energy);
    out
}
