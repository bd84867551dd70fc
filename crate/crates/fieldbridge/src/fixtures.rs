//! Built-in guest scripts.
//!
//! These are the inline scripts the host falls back to when no `--script`
//! path is given, and the fixtures the test suites load. Each follows the
//! guest calling convention: `calculate(face_centres, time)`,
//! `calculate(T, gamma)` or `predict(strain)` / `predict_into(strain, stress)`.

/// Lid profile `u_x = sin(pi t) sin(40 pi x)` on an `(n, 3)` face-centre array.
pub const PROFILE: &str = r#"
import numpy as np

def calculate(face_centres, time):
    result = np.zeros(shape=face_centres.shape)
    x = face_centres[:, 0]
    result[:, 0] = np.sin(np.pi*time)*np.sin(40*np.pi*x)
    return result
"#;

/// In-place explicit sweep on a flat square temperature field.
pub const HEAT_STEP: &str = r#"
import numpy as np

def calculate(T, gamma):
    N = T.shape[0]
    Nx = np.sqrt(N).astype(int)
    Ny = Nx
    if Nx * Ny != N:
        raise ValueError("temperature field of %d cells is not square" % N)

    for i in range(1, Nx - 1):
        for j in range(1, Ny - 1):
            T[i*Ny + j] = \
                gamma*(T[i*Ny + j + 1] + T[i*Ny + j - 1] \
                    + T[(i + 1)*Ny + j] + T[(i - 1)*Ny + j] \
                    - 4*T[i*Ny + j]) + T[i*Ny + j]

    return T
"#;

/// Hooke's law with Lamé constants `lame_1` (lambda) and `lame_2` (mu) taken
/// from the scope.
pub const ANALYTIC_LAW: &str = r#"
import numpy as np

def predict(strain_tensor):
    stress = np.zeros([strain_tensor.shape[0], 6])
    trace = strain_tensor[:, 0] + strain_tensor[:, 1] + strain_tensor[:, 2]
    stress[:, 0] = 2 * lame_2 * strain_tensor[:, 0] + lame_1 * trace
    stress[:, 1] = 2 * lame_2 * strain_tensor[:, 1] + lame_1 * trace
    stress[:, 2] = 2 * lame_2 * strain_tensor[:, 2] + lame_1 * trace
    stress[:, 3] = 2 * lame_2 * strain_tensor[:, 3]
    stress[:, 4] = 2 * lame_2 * strain_tensor[:, 4]
    stress[:, 5] = 2 * lame_2 * strain_tensor[:, 5]
    return stress

def predict_into(strain_tensor, stress):
    trace = strain_tensor[:, 0] + strain_tensor[:, 1] + strain_tensor[:, 2]
    trace *= lame_1
    np.multiply(strain_tensor, 2 * lame_2, out=stress)
    stress[:, 0] += trace
    stress[:, 1] += trace
    stress[:, 2] += trace
"#;

/// 6 -> 20 (ReLU) -> 6 network with min-max scaling. Weights come either from
/// `load_weights(path)` (JSON bundle) or from globals set by the host.
pub const ARRAY_NN_LAW: &str = r#"
import json
import numpy as np

HIDDEN_WIDTH = 20

def load_weights(path):
    global w0, b0, w1, b1, x_min, x_max, y_min, y_max
    with open(path) as f:
        wb = json.load(f)
    w0 = np.array(wb["w0"], dtype=np.float64)
    b0 = np.array(wb["b0"], dtype=np.float64)
    w1 = np.array(wb["w1"], dtype=np.float64)
    b1 = np.array(wb["b1"], dtype=np.float64)
    x_min = np.array(wb["x_scaler"]["min"], dtype=np.float64)
    x_max = np.array(wb["x_scaler"]["max"], dtype=np.float64)
    y_min = np.array(wb["y_scaler"]["min"], dtype=np.float64)
    y_max = np.array(wb["y_scaler"]["max"], dtype=np.float64)
    check_weights()

def check_weights():
    assert w0.shape == (6, HIDDEN_WIDTH), w0.shape
    assert b0.shape == (HIDDEN_WIDTH,), b0.shape
    assert w1.shape == (HIDDEN_WIDTH, 6), w1.shape
    assert b1.shape == (6,), b1.shape

def neural_prediction(x, w0, w1, b0, b1):
    l0 = x.dot(w0) + b0
    l0 = np.maximum(0, l0)
    l1 = l0.dot(w1) + b1
    return l1

def predict(x):
    x = (x - x_min) / (x_max - x_min)
    prediction_output_scaled = neural_prediction(x, w0, w1, b0, b1)
    return prediction_output_scaled * (y_max - y_min) + y_min

def predict_into(x, stress):
    stress[...] = predict(x)
"#;
