use fptc_nn::*;

#[test]
fn concat_split_round_trip() {
    let a = Tensor::<f64>::from_fn([2, 3, 2, 2], |i| i as f64);
    let b = Tensor::<f64>::from_fn([2, 1, 2, 2], |i| -(i as f64));
    let c = Tensor::concat_channels(&a, &b).unwrap();
    assert_eq!(c.shape(), [2, 4, 2, 2]);
    let (x, y) = c.split_channels(3);
    assert_eq!(x, a);
    assert_eq!(y, b);
}
