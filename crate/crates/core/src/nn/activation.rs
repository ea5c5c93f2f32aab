use super::tensor::Tensor;

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Gradient through ReLU given the layer's output (zero where the unit was off).
pub fn relu_backward(output: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut g = grad_out.clone();
    for (gv, &o) in g.data_mut().iter_mut().zip(output.data()) {
        if o <= 0.0 {
            *gv = 0.0;
        }
    }
    g
}

pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor) -> Tensor {
    x.map(sigmoid_scalar)
}

pub fn sigmoid_backward(output: &Tensor, grad_out: &Tensor) -> Tensor {
    let mut g = grad_out.clone();
    for (gv, &s) in g.data_mut().iter_mut().zip(output.data()) {
        *gv *= s * (1.0 - s);
    }
    g
}
