//! Binary classification-grid format: 16-byte header (magic `ESDL`,
//! little-endian u32 width, height, budget) followed by one verdict byte per
//! pixel in row-major order.

use crate::error::{Error, Result};
use crate::orbit::OrbitClass;

pub const MAGIC: &[u8; 4] = b"ESDL";

pub fn class_to_byte(c: OrbitClass) -> u8 {
    match c {
        OrbitClass::Undetermined => 0,
        OrbitClass::FastEscaping => 1,
        OrbitClass::Escaping => 2,
        OrbitClass::BoundedWithinBudget => 3,
        OrbitClass::AttractedReal => 4,
    }
}

pub fn byte_to_class(b: u8) -> Result<OrbitClass> {
    Ok(match b {
        0 => OrbitClass::Undetermined,
        1 => OrbitClass::FastEscaping,
        2 => OrbitClass::Escaping,
        3 => OrbitClass::BoundedWithinBudget,
        4 => OrbitClass::AttractedReal,
        other => return Err(Error::Malformed(format!("unknown verdict tag {other}"))),
    })
}

pub fn encode_grid(classes: &[OrbitClass], width: u32, height: u32, budget: u32) -> Vec<u8> {
    assert_eq!(classes.len(), width as usize * height as usize);
    let mut out = Vec::with_capacity(16 + classes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    out.extend_from_slice(&budget.to_le_bytes());
    out.extend(classes.iter().map(|&c| class_to_byte(c)));
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<(u32, u32, u32, Vec<OrbitClass>)> {
    if bytes.len() < 16 || &bytes[0..4] != MAGIC {
        return Err(Error::Malformed("bad grid header".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let (w, h, budget) = (u32_at(4), u32_at(8), u32_at(12));
    let expect = w as usize * h as usize;
    let payload = bytes
        .get(16..16 + expect)
        .ok_or_else(|| Error::Malformed("truncated grid payload".into()))?;
    let classes = payload
        .iter()
        .map(|&b| byte_to_class(b))
        .collect::<Result<Vec<_>>>()?;
    Ok((w, h, budget, classes))
}
