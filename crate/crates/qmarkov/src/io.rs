//! JSON wire formats for channels, tuples, states and reports.
//!
//! Matrices are encoded row-major as nested arrays of `[re, im]` pairs:
//! `{"dim": n, "kraus": [ [[ [re,im], ... ], ...], ... ]}`. Loaders validate
//! unitality and report the defect norm instead of silently accepting bad
//! input.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fcs::PopescuTuple;
use crate::structure::max_entropy_invariant_state;
use crate::tol::Tolerances;
use crate::{DensityState, KrausChannel, C64};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim: usize,
    pub kraus: Vec<MatrixJson>,
    /// Optional invariant state; computed from the channel when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<MatrixJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleJson {
    pub corner_dim: usize,
    pub site_dim: usize,
    pub kraus: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<MatrixJson>,
}

pub fn matrix_to_json(m: &Array2<C64>) -> MatrixJson {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, dim: usize) -> Result<Array2<C64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidInput(format!(
            "matrix shape mismatch: expected {dim}×{dim}"
        )));
    }
    let mut m = Array2::zeros((dim, dim));
    for (i, row) in rows.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = C64::new(re, im);
        }
    }
    Ok(m)
}

/// Decoded channel plus its unitality defect and the invariant state used
/// downstream.
#[derive(Debug)]
pub struct LoadedChannel {
    pub channel: KrausChannel,
    pub state: DensityState,
    pub unitality_defect: f64,
    pub state_was_computed: bool,
}

pub fn decode_channel(json: &ChannelJson, tol: &Tolerances) -> Result<LoadedChannel> {
    let kraus = json
        .kraus
        .iter()
        .map(|k| matrix_from_json(k, json.dim))
        .collect::<Result<Vec<_>>>()?;
    let channel = KrausChannel::new(kraus, tol.unitality)?;
    let unitality_defect = channel.unitality_defect();
    let (state, computed) = match &json.state {
        Some(rows) => (
            DensityState::new(matrix_from_json(rows, json.dim)?, tol.density)?,
            false,
        ),
        None => (max_entropy_invariant_state(&channel)?, true),
    };
    let res = state.invariance_residual(&channel)?;
    if res > tol.invariance.max(1e-8) {
        return Err(Error::StateNotInvariant { residual: res });
    }
    Ok(LoadedChannel {
        channel,
        state,
        unitality_defect,
        state_was_computed: computed,
    })
}

pub fn encode_channel(channel: &KrausChannel, state: Option<&DensityState>) -> ChannelJson {
    ChannelJson {
        dim: channel.dim(),
        kraus: channel.kraus().iter().map(matrix_to_json).collect(),
        state: state.map(|s| matrix_to_json(s.matrix())),
    }
}

/// Decoded tuple; raw inputs with a non-faithful state are support-reduced
/// and flagged.
#[derive(Debug)]
pub struct LoadedTuple {
    pub tuple: PopescuTuple<C64>,
    pub reduced: bool,
    pub unitality_defect: f64,
}

pub fn decode_tuple(json: &TupleJson, tol: &Tolerances) -> Result<LoadedTuple> {
    if json.kraus.len() != json.site_dim {
        return Err(Error::InvalidInput(format!(
            "site dimension {} does not match the number of operators {}",
            json.site_dim,
            json.kraus.len()
        )));
    }
    let kraus = json
        .kraus
        .iter()
        .map(|k| matrix_from_json(k, json.corner_dim))
        .collect::<Result<Vec<_>>>()?;
    let channel = KrausChannel::new(kraus.clone(), tol.unitality)?;
    let unitality_defect = channel.unitality_defect();
    let state = match &json.state {
        Some(rows) => DensityState::new(matrix_from_json(rows, json.corner_dim)?, tol.density)?,
        None => max_entropy_invariant_state(&channel)?,
    };
    if state.faithful() {
        Ok(LoadedTuple {
            tuple: PopescuTuple::new(kraus, state, tol.unitality)?,
            reduced: false,
            unitality_defect,
        })
    } else {
        Ok(LoadedTuple {
            tuple: crate::fcs::support_reduce(kraus, &state, tol)?,
            reduced: true,
            unitality_defect,
        })
    }
}

pub fn encode_tuple(tuple: &PopescuTuple<C64>) -> TupleJson {
    TupleJson {
        corner_dim: tuple.corner_dim(),
        site_dim: tuple.site_dim(),
        kraus: tuple.kraus().iter().map(matrix_to_json).collect(),
        state: Some(matrix_to_json(tuple.state().matrix())),
    }
}

/// 17-significant-digit float formatting used for CSV output, so repeated
/// runs are byte-identical.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with columns `(m, K_m, s_m)`.
pub fn decay_csv(kolmogorov: &[f64], strong: &[f64]) -> String {
    let mut out = String::from("m,K_m,s_m\n");
    let len = kolmogorov.len().max(strong.len());
    for m in 0..len {
        let k = kolmogorov.get(m).map(|v| fmt_f64(*v)).unwrap_or_default();
        let s = strong.get(m).map(|v| fmt_f64(*v)).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", m + 1, k, s));
    }
    out
}

/// CSV with columns `(n, c_n)`.
pub fn correlation_csv(series: &[(usize, f64)]) -> String {
    let mut out = String::from("n,c_n\n");
    for (n, c) in series {
        out.push_str(&format!("{},{}\n", n, fmt_f64(*c)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::fro_norm;

    #[test]
    fn channel_json_round_trip() {
        let ch = corpus::mixing_random_unitary_channel::<C64>();
        let st = DensityState::maximally_mixed(2);
        let json = encode_channel(&ch, Some(&st));
        let text = serde_json::to_string(&json).unwrap();
        let parsed: ChannelJson = serde_json::from_str(&text).unwrap();
        let loaded = decode_channel(&parsed, &Tolerances::default()).unwrap();
        for (a, b) in loaded.channel.kraus().iter().zip(ch.kraus().iter()) {
            assert!(fro_norm(&(a - b)) < 1e-15);
        }
        assert!(!loaded.state_was_computed);
        assert!(loaded.unitality_defect < 1e-12);
    }

    #[test]
    fn missing_state_is_computed() {
        let ch = corpus::collapse_channel::<C64>();
        let json = encode_channel(&ch, None);
        let loaded = decode_channel(&json, &Tolerances::default()).unwrap();
        assert!(loaded.state_was_computed);
        assert!((loaded.state.matrix()[(0, 0)].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn corrupted_unitality_is_rejected() {
        let ch = corpus::two_cycle_channel::<C64>();
        let mut json = encode_channel(&ch, None);
        json.kraus[0][0][1][0] = 0.9;
        let err = decode_channel(&json, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotUnital { .. }));
    }

    #[test]
    fn tuple_decoding_reduces_non_faithful_input() {
        let ch = corpus::collapse_channel::<C64>();
        let json = TupleJson {
            corner_dim: 2,
            site_dim: 2,
            kraus: ch.kraus().iter().map(matrix_to_json).collect(),
            state: None,
        };
        let loaded = decode_tuple(&json, &Tolerances::default()).unwrap();
        assert!(loaded.reduced);
        assert_eq!(loaded.tuple.corner_dim(), 1);
    }

    #[test]
    fn csv_formatting_is_fixed_width() {
        let s = decay_csv(&[0.5, 0.25], &[1.0, 0.5]);
        assert!(s.starts_with("m,K_m,s_m\n"));
        assert!(s.contains("5.0000000000000000e-1"));
    }
}
