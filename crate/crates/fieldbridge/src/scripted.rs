//! Solver hooks that delegate work to guest scripts.
//!
//! Each hook states which guest function it calls and which names it uses in
//! the scope. The transfer strategy only changes how data crosses the
//! boundary, never the guest arithmetic.

use std::path::Path;
use std::time::Instant;

use fieldbridge_core::constitutive::TENSOR;
use fieldbridge_core::{FieldBuffer, LameParams, WeightBundle, HIDDEN_WIDTH};

use crate::bridge::{GuestError, Session, TransferStrategy};
use crate::error::{Error, Result};

/// Which stress law a benchmark row evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LawKind {
    NativeHooke,
    ScriptedAnalytic,
    ScriptedArrayNn,
}

impl LawKind {
    pub fn name(self) -> &'static str {
        match self {
            LawKind::NativeHooke => "native",
            LawKind::ScriptedAnalytic => "analytic",
            LawKind::ScriptedArrayNn => "nn",
        }
    }
}

impl std::str::FromStr for LawKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "native" => Ok(LawKind::NativeHooke),
            "analytic" => Ok(LawKind::ScriptedAnalytic),
            "nn" => Ok(LawKind::ScriptedArrayNn),
            other => Err(format!("unknown law {other:?} (native, analytic, nn)")),
        }
    }
}

/// Guest string literal for `text` (JSON string syntax is valid Python).
pub fn guest_str_literal(text: &str) -> String {
    serde_json::to_string(text).expect("strings always serialize")
}

fn guest_dims(n: usize, c: usize) -> String {
    if c == 1 {
        format!("({n},)")
    } else {
        format!("({n}, {c})")
    }
}

/// Builds guest array `name` from the host field one element at a time.
pub fn put_field_per_element(s: &Session, name: &str, field: &FieldBuffer) -> Result<()> {
    let (n, c) = field.shape();
    s.exec_statement(&format!("{name} = _fb_np.zeros({})", guest_dims(n, c)))?;
    let store = format!("{name}[int(_fb_index)] = _fb_element");
    for index in 0..n {
        s.put_element("_fb_element", field, index)?;
        s.set_scalar("_fb_index", index as f64)?;
        s.exec_statement(&store)?;
    }
    Ok(())
}

/// Reads guest array `name` back one element at a time.
pub fn get_field_per_element(
    s: &Session,
    name: &str,
    shape: (usize, usize),
) -> Result<FieldBuffer> {
    let (n, c) = shape;
    let mut out = FieldBuffer::zeros(n, c)?;
    s.exec_statement(&format!(
        "_fb_shape_ok = float(_fb_np.shape({name}) in ({}, ({n}, {c})))",
        guest_dims(n, c)
    ))?;
    if s.get_scalar("_fb_shape_ok")? != 1.0 {
        return Err(GuestError::new(
            crate::GuestErrorKind::ShapeMismatch,
            format!("guest {name:?} does not have shape ({n}, {c})"),
        )
        .into());
    }
    let load = format!("_fb_element = {name}[int(_fb_index)]");
    for index in 0..n {
        s.set_scalar("_fb_index", index as f64)?;
        s.exec_statement(&load)?;
        s.get_element_into("_fb_element", out.row_mut(index))?;
    }
    Ok(out)
}

/// One sweep of the guest `calculate(T, gamma)` on the flat temperature
/// field `t`, updating it in place.
///
/// With [`TransferStrategy::ByReference`] the guest mutates the host buffer
/// directly and its return value is ignored, so the script must update `T`
/// in place.
pub fn scripted_fd_step(
    s: &Session,
    t: &mut FieldBuffer,
    gamma: f64,
    strategy: TransferStrategy,
) -> Result<()> {
    let shape = t.shape();
    s.set_scalar("gamma", gamma)?;
    match strategy {
        TransferStrategy::WholeFieldCopy => {
            s.put_field_copy("T", t)?;
            s.exec_statement("T = calculate(T, gamma)")?;
            let out = s.get_field_copy("T", shape)?;
            t.as_mut_slice().copy_from_slice(out.as_slice());
        }
        TransferStrategy::PerElementCopy => {
            put_field_per_element(s, "T", t)?;
            s.exec_statement("T = calculate(T, gamma)")?;
            let out = get_field_per_element(s, "T", shape)?;
            t.as_mut_slice().copy_from_slice(out.as_slice());
        }
        TransferStrategy::ByReference => {
            let mut lease = s.publish_field_by_ref("T", t)?;
            let result = s.exec_statement("calculate(T, gamma)");
            lease.release()?;
            result?;
        }
    }
    Ok(())
}

/// Guest `calculate(face_centres, time)` on an `(n, 3)` face-centre field.
pub fn eval_scripted_profile(
    s: &Session,
    face_centres: &FieldBuffer,
    time: f64,
) -> Result<FieldBuffer> {
    if face_centres.n_components() != 3 {
        return Err(GuestError::new(
            crate::GuestErrorKind::ShapeMismatch,
            format!(
                "face centres need 3 components, got {}",
                face_centres.n_components()
            ),
        )
        .into());
    }
    s.put_field_copy("face_centres", face_centres)?;
    s.set_scalar("time", time)?;
    s.exec_statement("velocities = calculate(face_centres, time)\n")?;
    Ok(s.get_field_copy("velocities", (face_centres.n_elements(), 3))?)
}

/// Publishes the Lamé constants as `lame_1` (lambda) and `lame_2` (mu).
pub fn set_lame(s: &Session, params: &LameParams) -> Result<()> {
    s.set_scalar("lame_1", params.lambda)?;
    s.set_scalar("lame_2", params.mu)?;
    Ok(())
}

/// Transfers network weights and scalers into the globals the array-network
/// script reads (`w0`, `b0`, `w1`, `b1`, `x_min`, `x_max`, `y_min`, `y_max`).
pub fn load_weight_bundle(s: &Session, bundle: &WeightBundle) -> Result<()> {
    bundle.validate()?;
    let flat = |rows: &[&[f64]]| {
        FieldBuffer::scalar(rows.iter().flat_map(|r| r.iter().copied()).collect())
    };
    let w0: Vec<&[f64]> = bundle.w0.iter().map(|r| &r[..]).collect();
    let w1: Vec<&[f64]> = bundle.w1.iter().map(|r| &r[..]).collect();
    let parts = [
        ("w0", flat(&w0)),
        ("b0", flat(&[&bundle.b0])),
        ("w1", flat(&w1)),
        ("b1", flat(&[&bundle.b1])),
        ("x_min", flat(&[&bundle.x_scaler.min])),
        ("x_max", flat(&[&bundle.x_scaler.max])),
        ("y_min", flat(&[&bundle.y_scaler.min])),
        ("y_max", flat(&[&bundle.y_scaler.max])),
    ];
    for (name, values) in &parts {
        s.put_field_copy(name, values)?;
    }
    s.exec_statement(&format!(
        "w0 = w0.reshape({TENSOR}, {HIDDEN_WIDTH})\nw1 = w1.reshape({HIDDEN_WIDTH}, {TENSOR})"
    ))?;
    Ok(())
}

/// Calls the guest `load_weights(path)` on a weight bundle JSON file.
pub fn load_weight_file(s: &Session, path: &Path) -> Result<()> {
    let path = path.to_str().ok_or_else(|| {
        Error::Config(format!("weight path {} is not valid UTF-8", path.display()))
    })?;
    s.exec_statement(&format!("load_weights({})", guest_str_literal(path)))?;
    Ok(())
}

/// Stress from strain through the guest `predict` (or `predict_into` for
/// [`TransferStrategy::ByReference`]).
///
/// The matching law script must be loaded, with `lame_1`/`lame_2` set for the
/// analytic law or weights loaded for the network law.
pub fn scripted_stress(
    s: &Session,
    strain: &FieldBuffer,
    strategy: TransferStrategy,
    law: LawKind,
) -> Result<FieldBuffer> {
    scripted_stress_until(s, strain, strategy, law, None)
}

/// [`scripted_stress`] that gives up with [`Error::Timeout`] once `deadline`
/// passes. The deadline is checked between guest calls.
pub fn scripted_stress_until(
    s: &Session,
    strain: &FieldBuffer,
    strategy: TransferStrategy,
    law: LawKind,
    deadline: Option<(Instant, std::time::Duration)>,
) -> Result<FieldBuffer> {
    if law == LawKind::NativeHooke {
        return Err(Error::Config(
            "the native law has no guest implementation".into(),
        ));
    }
    if strain.n_components() != TENSOR {
        return Err(GuestError::new(
            crate::GuestErrorKind::ShapeMismatch,
            format!(
                "strain needs {TENSOR} components, got {}",
                strain.n_components()
            ),
        )
        .into());
    }
    let n = strain.n_elements();
    match strategy {
        TransferStrategy::WholeFieldCopy => {
            s.put_field_copy("strain", strain)?;
            s.exec_statement("stress = predict(strain)")?;
            Ok(s.get_field_copy("stress", (n, TENSOR))?)
        }
        TransferStrategy::PerElementCopy => {
            let mut stress = FieldBuffer::zeros(n, TENSOR)?;
            for cell in 0..n {
                if cell % 1024 == 0 {
                    if let Some((at, budget)) = deadline {
                        if Instant::now() >= at {
                            return Err(Error::Timeout(budget));
                        }
                    }
                }
                s.put_element("strain_cell", strain, cell)?;
                s.exec_statement("stress_cell = predict(strain_cell.reshape(1, 6))")?;
                s.get_element_into("stress_cell", stress.row_mut(cell))?;
            }
            Ok(stress)
        }
        TransferStrategy::ByReference => {
            let mut stress = FieldBuffer::zeros(n, TENSOR)?;
            {
                let mut strain_lease = s.publish_field_by_ref_readonly("strain", strain)?;
                let mut stress_lease = s.publish_field_by_ref("stress", &mut stress)?;
                let result = s.exec_statement("predict_into(strain, stress)");
                stress_lease.release()?;
                strain_lease.release()?;
                result?;
            }
            Ok(stress)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bridge::test_session;
    use crate::fixtures;
    use fieldbridge_core::{
        build_exact_nn_weights, error_norms, hooke_native, lame_from_engineering, make_grid,
        native_fd_step, synth_strain_field, MinMaxScaler, Patch,
    };

    #[test]
    fn literal_escaping() {
        assert_eq!(guest_str_literal(r#"a"b\c"#), r#""a\"b\\c""#);
    }

    #[test]
    fn heat_step_matches_native_under_every_strategy() {
        let (_g, s) = test_session();
        s.load_script(&fixtures::HEAT_STEP.into()).unwrap();
        let grid = make_grid(6, 6, 0.06, 0.06).unwrap();
        let start: Vec<f64> = (0..36)
            .map(|k| 273.0 + ((k * 17) % 11) as f64 * 9.0)
            .collect();
        let mut native = FieldBuffer::scalar(start.clone());
        native_fd_step(&mut native, 0.2, &grid).unwrap();
        for strategy in TransferStrategy::ALL {
            let mut t = FieldBuffer::scalar(start.clone());
            scripted_fd_step(&s, &mut t, 0.2, strategy).unwrap();
            for (a, b) in t.as_slice().iter().zip(native.as_slice()) {
                assert!((a - b).abs() <= 1e-12 * b.abs(), "{strategy}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn non_square_heat_field_is_a_guest_error() {
        let (_g, s) = test_session();
        s.load_script(&fixtures::HEAT_STEP.into()).unwrap();
        let mut t = FieldBuffer::scalar(vec![1.0; 10]);
        let err = scripted_fd_step(&s, &mut t, 0.1, TransferStrategy::WholeFieldCopy).unwrap_err();
        assert!(matches!(err, Error::Guest(_)), "{err}");
    }

    #[test]
    fn profile_hook_matches_host_formula() {
        let (_g, s) = test_session();
        s.load_script(&fixtures::PROFILE.into()).unwrap();
        let grid = make_grid(20, 20, 0.1, 0.1).unwrap();
        let fc = grid.patch_face_centres(Patch::Top);
        let v = eval_scripted_profile(&s, &fc, 0.5).unwrap();
        assert!((v.get(2, 0).unwrap() - 1.0).abs() < 1e-12);
        let host = fieldbridge_core::profile::evaluate_profile(&fc, 0.5).unwrap();
        assert!(error_norms(&v, &host).unwrap().linf < 1e-12);
        let zero = eval_scripted_profile(&s, &fc, 0.0).unwrap();
        assert!(zero.as_slice().iter().all(|x| *x == 0.0));

        s.exec_statement("def calculate(face_centres, time):\n    return face_centres[:, :2]")
            .unwrap();
        let err = eval_scripted_profile(&s, &fc, 0.5).unwrap_err();
        assert!(
            matches!(err, Error::Guest(ref g) if g.kind == crate::GuestErrorKind::ShapeMismatch)
        );
    }

    #[test]
    fn stress_laws_agree_with_native() {
        let (_g, s) = test_session();
        let p = lame_from_engineering(200e9, 0.3).unwrap();
        let range = MinMaxScaler::symmetric(2e-3).unwrap();
        let strain = synth_strain_field(64, 11, &range);
        let reference = hooke_native(&strain, &p).unwrap();
        let scale = reference.max_abs();

        s.load_script(&fixtures::ANALYTIC_LAW.into()).unwrap();
        set_lame(&s, &p).unwrap();
        for strategy in TransferStrategy::ALL {
            let out = scripted_stress(&s, &strain, strategy, LawKind::ScriptedAnalytic).unwrap();
            assert!(
                error_norms(&out, &reference).unwrap().linf <= 1e-12 * scale,
                "{strategy}"
            );
        }

        s.load_script(&fixtures::ARRAY_NN_LAW.into()).unwrap();
        load_weight_bundle(&s, &build_exact_nn_weights(&p, &range).unwrap()).unwrap();
        s.exec_statement("check_weights()").unwrap();
        for strategy in TransferStrategy::ALL {
            let out = scripted_stress(&s, &strain, strategy, LawKind::ScriptedArrayNn).unwrap();
            assert!(
                error_norms(&out, &reference).unwrap().linf <= 1e-9 * scale,
                "{strategy}"
            );
        }

        let empty = FieldBuffer::zeros(0, 6).unwrap();
        for strategy in TransferStrategy::ALL {
            let out = scripted_stress(&s, &empty, strategy, LawKind::ScriptedArrayNn).unwrap();
            assert_eq!(out.shape(), (0, 6));
        }
        assert!(scripted_stress(
            &s,
            &strain,
            TransferStrategy::ByReference,
            LawKind::NativeHooke
        )
        .is_err());
        assert_eq!(s.active_leases(), 0);
    }

    #[test]
    fn per_element_deadline_in_the_past_times_out() {
        let (_g, s) = test_session();
        s.load_script(&fixtures::ANALYTIC_LAW.into()).unwrap();
        set_lame(&s, &lame_from_engineering(1e9, 0.25).unwrap()).unwrap();
        let strain = FieldBuffer::zeros(10, 6).unwrap();
        let budget = std::time::Duration::from_millis(0);
        let err = scripted_stress_until(
            &s,
            &strain,
            TransferStrategy::PerElementCopy,
            LawKind::ScriptedAnalytic,
            Some((Instant::now(), budget)),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Timeout(_)));
    }
}
