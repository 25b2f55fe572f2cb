use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{HomogenizeError, StiffnessTensor};

pub const MAX_CONDITION_NUMBER: f64 = 1e12;

/// Property names in output order.
pub const PROPERTY_KEYS: [&str; 18] = [
    "E", "E_1", "E_2", "E_3", "G", "G_23", "G_13", "G_12", "nu", "nu_12", "nu_13", "nu_23", "nu_21", "nu_31", "nu_32",
    "K", "A", "V",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyVector {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_1")]
    pub e1: f64,
    #[serde(rename = "E_2")]
    pub e2: f64,
    #[serde(rename = "E_3")]
    pub e3: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "G_23")]
    pub g23: f64,
    #[serde(rename = "G_13")]
    pub g13: f64,
    #[serde(rename = "G_12")]
    pub g12: f64,
    pub nu: f64,
    pub nu_12: f64,
    pub nu_13: f64,
    pub nu_23: f64,
    pub nu_21: f64,
    pub nu_31: f64,
    pub nu_32: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

impl PropertyVector {
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "E" => self.e,
            "E_1" => self.e1,
            "E_2" => self.e2,
            "E_3" => self.e3,
            "G" => self.g,
            "G_23" => self.g23,
            "G_13" => self.g13,
            "G_12" => self.g12,
            "nu" => self.nu,
            "nu_12" => self.nu_12,
            "nu_13" => self.nu_13,
            "nu_23" => self.nu_23,
            "nu_21" => self.nu_21,
            "nu_31" => self.nu_31,
            "nu_32" => self.nu_32,
            "K" => self.k,
            "A" => self.a,
            "V" => self.v,
            _ => return None,
        })
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        PROPERTY_KEYS.iter().map(|&k| (k, self.get(k).unwrap_or(f64::NAN))).collect()
    }

    /// Flat symbol-keyed map, optionally rounded to two significant figures.
    pub fn to_json(&self, rounded: bool) -> Value {
        let map: Map<String, Value> = self
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_string(), Value::from(if rounded { round_2sf(v) } else { v })))
            .collect();
        Value::Object(map)
    }

    pub fn from_json(value: &Value) -> Option<PropertyVector> {
        serde_json::from_value(value.clone()).ok()
    }
}

/// Voigt-Reuss-Hill averages, directional moduli and Poisson ratios of a stiffness tensor.
pub fn extract_properties(tensor: &StiffnessTensor, volume_fraction: f64) -> Result<PropertyVector, HomogenizeError> {
    let cond = tensor.condition_number();
    if !cond.is_finite() || cond >= MAX_CONDITION_NUMBER {
        return Err(HomogenizeError::IllConditioned(cond));
    }
    let c = &tensor.c;
    let s = tensor.compliance().ok_or(HomogenizeError::IllConditioned(f64::INFINITY))?;
    let k_v = (c[(0, 0)] + c[(1, 1)] + c[(2, 2)] + 2.0 * (c[(0, 1)] + c[(0, 2)] + c[(1, 2)])) / 9.0;
    let g_v = ((c[(0, 0)] + c[(1, 1)] + c[(2, 2)]) - (c[(0, 1)] + c[(0, 2)] + c[(1, 2)])) / 15.0
        + (c[(3, 3)] + c[(4, 4)] + c[(5, 5)]) / 5.0;
    let k_r = 1.0 / (s[(0, 0)] + s[(1, 1)] + s[(2, 2)] + 2.0 * (s[(0, 1)] + s[(0, 2)] + s[(1, 2)]));
    let g_r = 15.0
        / (4.0 * (s[(0, 0)] + s[(1, 1)] + s[(2, 2)]) - 4.0 * (s[(0, 1)] + s[(0, 2)] + s[(1, 2)])
            + 3.0 * (s[(3, 3)] + s[(4, 4)] + s[(5, 5)]));
    let k = 0.5 * (k_v + k_r);
    let g = 0.5 * (g_v + g_r);
    // Loading along i, lateral response along j.
    let nu = |i: usize, j: usize| -s[(j, i)] / s[(i, i)];
    Ok(PropertyVector {
        e: 9.0 * k * g / (3.0 * k + g),
        e1: 1.0 / s[(0, 0)],
        e2: 1.0 / s[(1, 1)],
        e3: 1.0 / s[(2, 2)],
        g,
        g23: 1.0 / s[(3, 3)],
        g13: 1.0 / s[(4, 4)],
        g12: 1.0 / s[(5, 5)],
        nu: (3.0 * k - 2.0 * g) / (2.0 * (3.0 * k + g)),
        nu_12: nu(0, 1),
        nu_13: nu(0, 2),
        nu_23: nu(1, 2),
        nu_21: nu(1, 0),
        nu_31: nu(2, 0),
        nu_32: nu(2, 1),
        k,
        a: 5.0 * g_v / g_r + k_v / k_r - 6.0,
        v: volume_fraction,
    })
}

/// Two significant figures, half away from zero, applied to the shortest decimal form of `x`.
pub fn round_2sf(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    // `{:e}` prints the shortest round-tripping digits, so 0.995 rounds on "9.95e-1", not on its binary value.
    let repr = format!("{:e}", x.abs());
    let (mantissa, exp) = repr.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: Vec<u32> = mantissa.chars().filter_map(|c| c.to_digit(10)).collect();
    let mut kept = digits[0] * 10 + digits.get(1).copied().unwrap_or(0);
    if digits.get(2).copied().unwrap_or(0) >= 5 {
        kept += 1;
    }
    let value: f64 = format!("{kept}e{}", exp - 1).parse().expect("valid float");
    let out = value.copysign(x);
    if out == 0.0 {
        0.0
    } else {
        out
    }
}
