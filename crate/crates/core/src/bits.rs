//! Bit-string and subset-mask conventions.
//!
//! Label bit `b_n` of an `n_bits`-wide index is bit `n_bits - 1 - n` of the
//! integer, so `b_0` is the most significant bit. Variable subsets use the
//! same positions: the mask of `{z_n}` is `1 << (n_bits - 1 - n)`.

use crate::{Error, Result};

#[inline]
pub fn var_mask(var: usize, n_bits: usize) -> u32 {
    debug_assert!(var < n_bits);
    1u32 << (n_bits - 1 - var)
}

#[inline]
pub fn bit_of(index: usize, var: usize, n_bits: usize) -> u8 {
    ((index >> (n_bits - 1 - var)) & 1) as u8
}

pub fn index_to_bits(index: usize, n_bits: usize) -> Vec<u8> {
    (0..n_bits).map(|n| bit_of(index, n, n_bits)).collect()
}

pub fn bits_to_index(bits: &[u8]) -> Result<usize> {
    bits.iter().try_fold(0usize, |acc, &b| match b {
        0 | 1 => Ok((acc << 1) | b as usize),
        other => Err(Error::InvalidArgument(format!("bit value {other} is not 0 or 1"))),
    })
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn index_to_string(index: usize, n_bits: usize) -> String {
    bits_to_string(&index_to_bits(index, n_bits))
}

pub fn parse_bits(text: &str) -> Result<Vec<u8>> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::InvalidArgument(format!("`{other}` in bit string `{text}`"))),
        })
        .collect()
}

/// Variable indices of a subset mask, ascending.
pub fn mask_to_vars(mask: u32, n_bits: usize) -> Vec<usize> {
    (0..n_bits).filter(|&n| mask & var_mask(n, n_bits) != 0).collect()
}

pub fn vars_to_mask(vars: &[usize], n_bits: usize) -> Result<u32> {
    vars.iter().try_fold(0u32, |acc, &v| {
        if v >= n_bits {
            Err(Error::InvalidArgument(format!(
                "variable {v} out of range for {n_bits} variables"
            )))
        } else {
            Ok(acc | var_mask(v, n_bits))
        }
    })
}

/// Iterates every submask of `mask`, including `mask` itself and `0`.
pub fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 { None } else { Some((current - 1) & mask) };
        Some(current)
    })
}
