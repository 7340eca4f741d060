//! 2-D convolution and transposed convolution via im2col and matrix products.

use rand_chacha::ChaCha8Rng;

use crate::init::normal_vec;
use crate::param::{Ctx, Layer, Param};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeometry {
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
}

impl ConvGeometry {
    pub const fn new(kernel: usize, stride: usize, padding: usize) -> Self {
        Self { kernel, stride, padding }
    }

    /// Output side of a convolution over an input of side `n`.
    pub fn conv_out(&self, n: usize) -> usize {
        (n + 2 * self.padding - self.kernel) / self.stride + 1
    }

    /// Output side of a transposed convolution over an input of side `n`.
    pub fn transposed_out(&self, n: usize) -> usize {
        (n - 1) * self.stride + self.kernel - 2 * self.padding
    }

    fn is_pointwise(&self) -> bool {
        self.kernel == 1 && self.stride == 1 && self.padding == 0
    }
}

/// Unfolds one `c x h x w` sample into a `(c k k) x (oh ow)` column matrix.
pub(crate) fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, g: ConvGeometry, cols: &mut [T]) {
    let (oh, ow) = (g.conv_out(h), g.conv_out(w));
    let k = g.kernel;
    let p = g.padding as isize;
    let s = g.stride as isize;
    let mut row = 0;
    for ci in 0..c {
        let plane = &x[ci * h * w..(ci + 1) * h * w];
        for ky in 0..k {
            for kx in 0..k {
                let dst = &mut cols[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = oy as isize * s - p + ky as isize;
                    let line = &mut dst[oy * ow..(oy + 1) * ow];
                    if iy < 0 || iy >= h as isize {
                        line.iter_mut().for_each(|v| *v = T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                    for (ox, v) in line.iter_mut().enumerate() {
                        let ix = ox as isize * s - p + kx as isize;
                        *v = if ix < 0 || ix >= w as isize { T::zero() } else { src[ix as usize] };
                    }
                }
                row += 1;
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters columns back onto a zeroed `c x h x w` sample.
pub(crate) fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, g: ConvGeometry, x: &mut [T]) {
    let (oh, ow) = (g.conv_out(h), g.conv_out(w));
    let k = g.kernel;
    let p = g.padding as isize;
    let s = g.stride as isize;
    x.iter_mut().for_each(|v| *v = T::zero());
    let mut row = 0;
    for ci in 0..c {
        let plane = &mut x[ci * h * w..(ci + 1) * h * w];
        for ky in 0..k {
            for kx in 0..k {
                let src = &cols[row * oh * ow..(row + 1) * oh * ow];
                for oy in 0..oh {
                    let iy = oy as isize * s - p + ky as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                    for ox in 0..ow {
                        let ix = ox as isize * s - p + kx as isize;
                        if ix >= 0 && ix < w as isize {
                            dst[ix as usize] = dst[ix as usize] + src[oy * ow + ox];
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

fn add_bias<T: Scalar>(out: &mut [T], bias: &[T], plane: usize) {
    for (co, b) in bias.iter().enumerate() {
        for v in &mut out[co * plane..(co + 1) * plane] {
            *v = *v + *b;
        }
    }
}

fn accumulate_bias_grad<T: Scalar>(grad: &Tensor<T>, bias_grad: &mut [T]) {
    let plane = grad.plane_len();
    for n in 0..grad.batch() {
        let g = grad.sample(n);
        for (co, b) in bias_grad.iter_mut().enumerate() {
            *b = *b + g[co * plane..(co + 1) * plane].iter().copied().sum::<T>();
        }
    }
}

/// Convolution with weights laid out `c_out x (c_in k k)`.
pub struct Conv2d<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub geometry: ConvGeometry,
    pub weight: Param<T>,
    pub bias: Param<T>,
    input_shape: [usize; 4],
    cols: Vec<Vec<T>>,
}

impl<T: Scalar> Conv2d<T> {
    pub fn new(in_channels: usize, out_channels: usize, geometry: ConvGeometry, rng: &mut ChaCha8Rng) -> Self {
        let fan = in_channels * geometry.kernel * geometry.kernel;
        Self {
            in_channels,
            out_channels,
            geometry,
            weight: Param::trainable("weight", normal_vec(rng, out_channels * fan, 0.0, 0.02)),
            bias: Param::trainable("bias", vec![T::zero(); out_channels]),
            input_shape: [0; 4],
            cols: Vec::new(),
        }
    }

    fn col_rows(&self) -> usize {
        self.in_channels * self.geometry.kernel * self.geometry.kernel
    }
}

impl<T: Scalar> Layer<T> for Conv2d<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        let [n, c, h, w] = x.shape();
        assert_eq!(c, self.in_channels, "conv input channels");
        let g = self.geometry;
        let (oh, ow) = (g.conv_out(h), g.conv_out(w));
        let kk = self.col_rows();
        let mut out = Tensor::zeros([n, self.out_channels, oh, ow]);
        self.input_shape = x.shape();
        self.cols.clear();
        for i in 0..n {
            let cols = if g.is_pointwise() {
                x.sample(i).to_vec()
            } else {
                let mut cols = vec![T::zero(); kk * oh * ow];
                im2col(x.sample(i), c, h, w, g, &mut cols);
                cols
            };
            let o = out.sample_mut(i);
            T::gemm(self.out_channels, kk, oh * ow, &self.weight.value, false, &cols, false, T::zero(), o);
            add_bias(o, &self.bias.value, oh * ow);
            self.cols.push(cols);
        }
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let [n, c, h, w] = self.input_shape;
        let g = self.geometry;
        let p = grad_out.plane_len();
        let kk = self.col_rows();
        accumulate_bias_grad(grad_out, &mut self.bias.grad);
        let mut dx = Tensor::zeros(self.input_shape);
        let mut dcols = vec![T::zero(); kk * p];
        for i in 0..n {
            let go = grad_out.sample(i);
            T::gemm(self.out_channels, p, kk, go, false, &self.cols[i], true, T::one(), &mut self.weight.grad);
            T::gemm(kk, self.out_channels, p, &self.weight.value, true, go, false, T::zero(), &mut dcols);
            if g.is_pointwise() {
                dx.sample_mut(i).copy_from_slice(&dcols);
            } else {
                col2im(&dcols, c, h, w, g, dx.sample_mut(i));
            }
        }
        self.cols.clear();
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}

/// Transposed convolution with weights laid out `c_in x (c_out k k)`.
pub struct ConvTranspose2d<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    pub geometry: ConvGeometry,
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> ConvTranspose2d<T> {
    pub fn new(in_channels: usize, out_channels: usize, geometry: ConvGeometry, rng: &mut ChaCha8Rng) -> Self {
        let k2 = geometry.kernel * geometry.kernel;
        Self {
            in_channels,
            out_channels,
            geometry,
            weight: Param::trainable("weight", normal_vec(rng, in_channels * out_channels * k2, 0.0, 0.02)),
            bias: Param::trainable("bias", vec![T::zero(); out_channels]),
            input: None,
        }
    }
}

impl<T: Scalar> Layer<T> for ConvTranspose2d<T> {
    fn forward(&mut self, x: &Tensor<T>, _ctx: &mut Ctx) -> Tensor<T> {
        let [n, c, h, w] = x.shape();
        assert_eq!(c, self.in_channels, "transposed conv input channels");
        let g = self.geometry;
        let (oh, ow) = (g.transposed_out(h), g.transposed_out(w));
        let rows = self.out_channels * g.kernel * g.kernel;
        let mut out = Tensor::zeros([n, self.out_channels, oh, ow]);
        let mut cols = vec![T::zero(); rows * h * w];
        for i in 0..n {
            T::gemm(rows, c, h * w, &self.weight.value, true, x.sample(i), false, T::zero(), &mut cols);
            let o = out.sample_mut(i);
            col2im(&cols, self.out_channels, oh, ow, g, o);
            add_bias(o, &self.bias.value, oh * ow);
        }
        self.input = Some(x.clone());
        out
    }

    fn backward(&mut self, grad_out: &Tensor<T>) -> Tensor<T> {
        let x = self.input.take().expect("forward before backward");
        let [n, c, h, w] = x.shape();
        let g = self.geometry;
        let [_, co, oh, ow] = grad_out.shape();
        let rows = co * g.kernel * g.kernel;
        accumulate_bias_grad(grad_out, &mut self.bias.grad);
        let mut dx = Tensor::zeros(x.shape());
        let mut dcols = vec![T::zero(); rows * h * w];
        for i in 0..n {
            im2col(grad_out.sample(i), co, oh, ow, g, &mut dcols);
            T::gemm(c, rows, h * w, &self.weight.value, false, &dcols, false, T::zero(), dx.sample_mut(i));
            T::gemm(c, h * w, rows, x.sample(i), false, &dcols, true, T::one(), &mut self.weight.grad);
        }
        dx
    }

    fn params(&self) -> Vec<&Param<T>> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param<T>> {
        vec![&mut self.weight, &mut self.bias]
    }
}
