//! Binary state files: a text header followed by little-endian `f64`
//! spectral coefficients, row-major `[k][n]`.
//!
//! ```text
//! cigar-state <version> <header bytes, 10 digits>
//! key = value
//! ...
//! end
//! <payload>
//! ```

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use cigar_core::basis::BasisError;
use cigar_core::{Discretization, GridParams, SpectralField3D};
use num_complex::Complex64;
use thiserror::Error;

pub const MAGIC: &str = "cigar-state";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StateFileError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a state file")]
    BadMagic,
    #[error("state file version {found} not supported (expected {FORMAT_VERSION})")]
    Version { found: u32 },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("payload has {found} bytes, header implies {expected}")]
    PayloadLength { expected: usize, found: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Real parts only; every coefficient has zero imaginary part.
    Real,
    /// Interleaved real/imaginary.
    Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateHeader {
    pub kind: String,
    pub omega: f64,
    pub mass: f64,
    pub modes: usize,
    pub quad_size: usize,
    pub axial_points: usize,
    pub half_length: f64,
    pub mu: f64,
    pub energy: f64,
    pub time: f64,
    pub layout: Layout,
    pub physical_real: bool,
}

impl StateHeader {
    pub fn grid_params(&self) -> GridParams {
        GridParams {
            transverse_modes: self.modes,
            quad_size: self.quad_size,
            half_length: self.half_length,
            axial_points: self.axial_points,
        }
    }

    fn lines(&self) -> String {
        let layout = match self.layout {
            Layout::Real => "real",
            Layout::Complex => "complex",
        };
        // `{:?}` prints the shortest representation that parses back exactly
        format!(
            "kind = {}\nomega = {:?}\nmass = {:?}\nmodes = {}\nquad_size = {}\naxial_points = {}\nhalf_length = {:?}\nmu = {:?}\nenergy = {:?}\ntime = {:?}\nlayout = {}\nphysical_real = {}\nend\n",
            self.kind,
            self.omega,
            self.mass,
            self.modes,
            self.quad_size,
            self.axial_points,
            self.half_length,
            self.mu,
            self.energy,
            self.time,
            layout,
            self.physical_real
        )
    }
}

/// Metadata stored with a field.
#[derive(Clone, Debug, PartialEq)]
pub struct StateMeta {
    pub kind: String,
    pub omega: f64,
    pub mass: f64,
    pub mu: f64,
    pub energy: f64,
    pub time: f64,
}

pub fn encode(field: &SpectralField3D, meta: &StateMeta) -> Vec<u8> {
    let params = field.discretization().params();
    let layout = if field.coeffs().iter().all(|c| c.im.to_bits() == 0) {
        Layout::Real
    } else {
        Layout::Complex
    };
    let header = StateHeader {
        kind: meta.kind.clone(),
        omega: meta.omega,
        mass: meta.mass,
        modes: params.transverse_modes,
        quad_size: params.quad_size,
        axial_points: params.axial_points,
        half_length: params.half_length,
        mu: meta.mu,
        energy: meta.energy,
        time: meta.time,
        layout,
        physical_real: field.is_real(),
    };
    let body = header.lines();
    let first_len = format!("{MAGIC} {FORMAT_VERSION} 0000000000\n").len();
    let total = first_len + body.len();
    let mut out = format!("{MAGIC} {FORMAT_VERSION} {total:010}\n{body}").into_bytes();
    for c in field.coeffs() {
        out.extend_from_slice(&c.re.to_le_bytes());
        if layout == Layout::Complex {
            out.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<(StateHeader, SpectralField3D), StateFileError> {
    let first_end = bytes.iter().position(|b| *b == b'\n').ok_or(StateFileError::BadMagic)?;
    let first = std::str::from_utf8(&bytes[..first_end]).map_err(|_| StateFileError::BadMagic)?;
    let parts: Vec<&str> = first.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != MAGIC {
        return Err(StateFileError::BadMagic);
    }
    let version: u32 = parts[1].parse().map_err(|_| StateFileError::Header("version".into()))?;
    if version != FORMAT_VERSION {
        return Err(StateFileError::Version { found: version });
    }
    let header_len: usize = parts[2].parse().map_err(|_| StateFileError::Header("header length".into()))?;
    if header_len > bytes.len() || header_len <= first_end {
        return Err(StateFileError::Header("header length out of range".into()));
    }
    let text = std::str::from_utf8(&bytes[first_end + 1..header_len])
        .map_err(|_| StateFileError::Header("not utf-8".into()))?;
    let mut map = BTreeMap::new();
    let mut ended = false;
    for line in text.lines() {
        if line == "end" {
            ended = true;
            break;
        }
        let (k, v) = line
            .split_once(" = ")
            .ok_or_else(|| StateFileError::Header(format!("bad line '{line}'")))?;
        map.insert(k.to_string(), v.to_string());
    }
    if !ended {
        return Err(StateFileError::Header("missing 'end'".into()));
    }
    let get = |k: &str| map.get(k).ok_or_else(|| StateFileError::Header(format!("missing key '{k}'")));
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, StateFileError> {
        v.parse().map_err(|_| StateFileError::Header(format!("bad value for '{k}': {v}")))
    }
    let layout = match get("layout")?.as_str() {
        "real" => Layout::Real,
        "complex" => Layout::Complex,
        other => return Err(StateFileError::Header(format!("unknown layout '{other}'"))),
    };
    let header = StateHeader {
        kind: get("kind")?.clone(),
        omega: num("omega", get("omega")?)?,
        mass: num("mass", get("mass")?)?,
        modes: num("modes", get("modes")?)?,
        quad_size: num("quad_size", get("quad_size")?)?,
        axial_points: num("axial_points", get("axial_points")?)?,
        half_length: num("half_length", get("half_length")?)?,
        mu: num("mu", get("mu")?)?,
        energy: num("energy", get("energy")?)?,
        time: num("time", get("time")?)?,
        layout,
        physical_real: num("physical_real", get("physical_real")?)?,
    };
    let per = if layout == Layout::Real { 1 } else { 2 };
    let count = header.modes * header.axial_points;
    let payload = &bytes[header_len..];
    let expected = count * per * 8;
    if payload.len() != expected {
        return Err(StateFileError::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let read = |i: usize| f64::from_le_bytes(payload[8 * i..8 * i + 8].try_into().expect("8 bytes"));
    let coeffs: Vec<Complex64> = (0..count)
        .map(|i| match layout {
            Layout::Real => Complex64::new(read(i), 0.0),
            Layout::Complex => Complex64::new(read(2 * i), read(2 * i + 1)),
        })
        .collect();
    let disc: Arc<Discretization> = Discretization::new(header.grid_params())?;
    // from_coeffs stores the flag without touching the coefficients
    let field = SpectralField3D::from_coeffs(&disc, coeffs, header.physical_real)
        .map_err(|e| StateFileError::Header(e.to_string()))?;
    Ok((header, field))
}

pub fn save(path: &Path, field: &SpectralField3D, meta: &StateMeta) -> Result<(), StateFileError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(field, meta))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(StateHeader, SpectralField3D), StateFileError> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> StateMeta {
        StateMeta {
            kind: "ground_state".into(),
            omega: 256.0,
            mass: 8.0 * std::f64::consts::PI,
            mu: 1.003,
            energy: -4.19,
            time: 0.0,
        }
    }

    #[test]
    fn header_and_payload_sizes() {
        let d = Discretization::new(GridParams::new(3, 8.0, 32)).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); d.len()];
        c[5] = Complex64::new(0.25, 0.0);
        let u = SpectralField3D::from_coeffs(&d, c.clone(), false).unwrap();
        let bytes = encode(&u, &meta());
        let text = String::from_utf8_lossy(&bytes[..60]).to_string();
        assert!(text.starts_with("cigar-state 1 "));
        let header_len: usize = text.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(bytes.len() - header_len, 3 * 32 * 8);

        c[6] = Complex64::new(0.0, -1.0);
        let v = SpectralField3D::from_coeffs(&d, c, false).unwrap();
        let bytes = encode(&v, &meta());
        let (h, back) = decode(&bytes).unwrap();
        assert_eq!(h.layout, Layout::Complex);
        assert_eq!(back.coeffs(), v.coeffs());
    }

    #[test]
    fn refuses_other_versions() {
        let d = Discretization::new(GridParams::new(2, 8.0, 16)).unwrap();
        let u = SpectralField3D::zeros(&d);
        let mut bytes = encode(&u, &meta());
        bytes[12] = b'7';
        assert!(matches!(decode(&bytes), Err(StateFileError::Version { found: 7 })));
        assert!(matches!(decode(b"hello\nworld"), Err(StateFileError::BadMagic)));
    }

    #[test]
    fn truncated_payload_rejected() {
        let d = Discretization::new(GridParams::new(2, 8.0, 16)).unwrap();
        let u = SpectralField3D::zeros(&d);
        let bytes = encode(&u, &meta());
        assert!(matches!(
            decode(&bytes[..bytes.len() - 3]),
            Err(StateFileError::PayloadLength { .. })
        ));
    }
}
