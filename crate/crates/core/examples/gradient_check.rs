//! Compares backpropagated gradients with central finite differences for a
//! small MLP and LSTM under both losses.
//!
//! ```text
//! cargo run --release --example gradient_check
//! ```

use creep_surrogate::neuralnet::{backward, Loss, LstmNet, Mlp, Network};

fn worst<N: Network>(net: &N, xs: &[Vec<f64>], ys: &[f64], loss: Loss) -> f64 {
    let h = 1e-5;
    let total = |n: &N| -> f64 {
        xs.iter().zip(ys).map(|(x, &y)| loss.eval(y, n.predict(x).unwrap()).unwrap().0).sum()
    };
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let (_, grad) = backward(net, &refs, ys, loss).unwrap();
    let mut out: f64 = 0.0;
    for k in 0..grad.len() {
        let (mut a, mut b) = (net.clone(), net.clone());
        a.params_mut()[k] += h;
        b.params_mut()[k] -= h;
        let fd = (total(&a) - total(&b)) / (2.0 * h);
        out = out.max((fd - grad[k]).abs() / fd.abs().max(grad[k].abs()).max(1e-6));
    }
    out
}

fn main() {
    let mlp = Mlp::init(5, &[4, 4], 0.0, 1);
    let xs: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..5).map(|j| ((i * 5 + j) as f64 * 0.37).sin()).collect())
        .collect();
    let ys: Vec<f64> = xs.iter().map(|x| mlp.predict(x).unwrap() + 0.6).collect();
    let lstm = LstmNet::init(1, 2, 2, 1);
    let seqs: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..8).map(|t| ((i * 8 + t) as f64 * 0.21).cos()).collect())
        .collect();
    let ts: Vec<f64> = seqs.iter().map(|x| lstm.predict(x).unwrap() - 0.6).collect();

    for loss in [Loss::RelativeAbsolute, Loss::Squared] {
        println!(
            "{loss:?}: mlp ({} params) {:.2e}, lstm ({} params) {:.2e}",
            mlp.params().len(),
            worst(&mlp, &xs, &ys, loss),
            lstm.params().len(),
            worst(&lstm, &seqs, &ts, loss)
        );
    }
}
