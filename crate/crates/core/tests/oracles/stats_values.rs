// Generated by gen_stats.py (mpmath, 64 significant digits). Do not edit.

/// (a, b, x, I_x(a, b))
pub const INCOMPLETE_BETA: [(f64, f64, f64, f64); 50] = [
    (0.5, 0.5, 0.05, 1.435662931287062748e-1),
    (0.5, 0.5, 0.77, 6.8157577136809970358e-1),
    (0.5, 2.5, 0.05, 3.7018812880753555631e-1),
    (0.5, 2.5, 0.77, 9.905656456348438975e-1),
    (0.5, 2.5, 0.999, 9.9999998925926457269e-1),
    (0.5, 7.0, 0.3, 9.7192862844070495402e-1),
    (0.5, 30.0, 0.0001, 6.1487458408771381614e-2),
    (0.5, 120.0, 0.5, 1.0),
    (0.5, 120.0, 0.77, 1.0),
    (0.5, 120.0, 0.999, 1.0),
    (1.0, 0.5, 0.05, 2.532056551910361074e-2),
    (1.0, 0.5, 0.999, 9.6837722339831619264e-1),
    (1.0, 1.0, 0.77, 7.7000000000000001776e-1),
    (1.0, 2.5, 0.05, 1.2035181038099101383e-1),
    (1.0, 2.5, 0.3, 5.9003658699830296524e-1),
    (1.0, 2.5, 0.77, 9.7463005124167571852e-1),
    (1.0, 2.5, 0.999, 9.9999996837722339832e-1),
    (1.0, 7.0, 0.77, 9.9996595174553000002e-1),
    (1.0, 7.0, 0.999, 1.0),
    (1.0, 120.0, 0.0001, 1.1928880020445134003e-2),
    (1.0, 120.0, 0.999, 1.0),
    (2.5, 0.5, 0.05, 1.9329504618162690461e-4),
    (2.5, 0.5, 0.3, 1.8927124071945651653e-2),
    (2.5, 2.5, 0.0001, 5.4319066831578931211e-10),
    (2.5, 2.5, 0.05, 2.8757575909514431855e-3),
    (2.5, 2.5, 0.5, 5.0e-1),
    (2.5, 7.0, 0.3, 6.4122246297172117081e-1),
    (2.5, 30.0, 0.0001, 1.573568935316703469e-7),
    (2.5, 30.0, 0.77, 9.999999999999999936e-1),
    (2.5, 120.0, 0.05, 9.7014478939785436384e-1),
    (2.5, 120.0, 0.999, 1.0),
    (7.0, 0.5, 0.999, 9.0744769887010159968e-1),
    (7.0, 1.0, 0.5, 7.8125e-3),
    (7.0, 7.0, 0.0001, 1.7150993001759782132e-25),
    (7.0, 30.0, 0.5, 9.9996519915293902159e-1),
    (7.0, 120.0, 0.77, 1.0),
    (30.0, 0.5, 0.05, 9.7932167394677644351e-41),
    (30.0, 0.5, 0.3, 2.5072056468159353766e-17),
    (30.0, 1.0, 0.999, 9.7043096726308571916e-1),
    (30.0, 2.5, 0.3, 1.6175640665394465392e-14),
    (30.0, 7.0, 0.3, 5.1371002546117525034e-11),
    (30.0, 120.0, 0.5, 9.9999999999998817938e-1),
    (30.0, 120.0, 0.999, 1.0),
    (120.0, 0.5, 0.77, 2.5327380135996466893e-15),
    (120.0, 1.0, 0.05, 7.5231638452626901653e-157),
    (120.0, 2.5, 0.5, 2.7046561818017342224e-34),
    (120.0, 2.5, 0.999, 9.985993279843988327e-1),
    (120.0, 7.0, 0.05, 2.7308422442123509674e-147),
    (120.0, 7.0, 0.3, 1.0637816730926099099e-54),
    (120.0, 30.0, 0.3, 4.1504461710486168332e-37),
];

/// (x, y, r, p)
pub const PEARSON: [(&[f64], &[f64], f64, f64); 10] = [
    (&[-0.497, 0.386, 0.385, -0.802, -3.806, -2.18, 0.187, 0.827, -1.292, 0.73, -0.663, -0.22, -4.45, -1.941, -1.803], &[-1.452, 1.842, 0.754, 1.009, 0.325, -0.752, -0.28, -1.635, 0.91, -1.735, -0.829, -0.29, -0.637, -0.872, -0.419], -3.1450409070048991583e-2, 9.1140541345843654315e-1),
    (&[0.647, 0.269, 0.825, 2.906, -1.56, 0.763, -1.888, -1.125], &[-0.759, 2.564, -0.275, -0.788, -1.783, -0.752, 1.536, -1.821], -4.3664822319022293817e-2, 9.1823246372789573794e-1),
    (&[2.147, 1.063, 0.932, 1.575, 1.912, -0.852, 0.781, -0.19, -3.296, -1.259, 0.759, -1.658, -1.38, 1.894], &[1.1, -0.079, 1.396, 1.347, 0.654, -0.891, 0.188, -1.365, -3.438, -1.616, -1.914, 0.075, 0.449, -0.077], 6.6966772679840385218e-1, 8.795324487319175382e-3),
    (&[-1.789, -1.498, 0.327, 1.614, -0.147, -2.009, 2.03, -1.17, 1.017, 1.753, -0.189, 1.069, -2.291, 1.069, -1.587, -5.648, -0.803, -1.785, 0.1], &[0.62, 1.278, 1.789, 2.821, 0.214, 0.503, 1.112, 1.131, 1.471, -1.013, -0.836, 2.094, 2.107, 2.082, -0.673, -0.106, -1.653, 2.546, -2.678], 1.261481036479620488e-1, 6.0683214835595413612e-1),
    (&[-1.574, 1.263, 2.257, 1.718, 0.69, 0.285, 0.305, 1.151, -0.352, 0.555, 1.145, 0.002, 1.528, 1.132, 4.021, 0.65, -0.855, -0.745, -0.026, 1.848, -0.673, 0.772, 3.675, -5.129, -2.248, 0.488], &[-0.34, 1.11, 0.698, 2.006, 0.834, -0.613, 3.827, 1.218, -1.041, 0.181, 0.344, -0.093, -3.182, -0.056, 3.908, -1.366, -0.609, 0.986, 1.269, 3.338, -2.953, -0.07, 1.678, -2.121, 0.298, -3.734], 4.6229430547712993116e-1, 1.7416024361228413764e-2),
    (&[1.366, -2.984, 0.352, 2.389, -0.299, 0.382, 1.594, 0.283, -0.177, 3.067, 2.097], &[1.232, 0.465, -1.289, 4.297, -0.765, 0.666, 3.009, 0.68, 0.741, 1.464, 0.303], 4.8761210502714263125e-1, 1.2815042512831892741e-1),
    (&[-2.053, -2.94, 2.533, 1.493, 2.946], &[-1.407, 0.002, -1.71, 1.149, 2.384], 3.8134552986687036435e-1, 5.2649519373591092549e-1),
    (&[3.018, -1.062, -3.211, 0.757, 1.013, 0.598, 0.472, -0.02, -1.884, -1.209, -1.534, -2.283, -1.869, -1.285, 1.076], &[-2.829, 0.58, 2.561, 0.111, -3.137, 1.499, 1.112, 2.839, 4.937, 2.037, 4.139, 2.908, 1.726, -1.486, -0.908], -6.9694015811363045403e-1, 3.8838039650370667375e-3),
    (&[-0.926, 0.516, 1.578, -1.001, -2.556, 0.688, 1.723, -1.182, 2.052, -1.167, -2.387, -0.484, 2.139, 0.253, 0.072], &[1.013, -0.216, -2.398, -1.414, 2.86, -1.912, -2.121, -0.76, -2.195, 1.275, 1.604, -0.588, -2.478, -0.678, 2.474], -7.7945618998689864039e-1, 6.1264753811537788828e-4),
    (&[4.173, 0.738, 1.636, 0.688, 2.692, -0.455, 0.504, 1.531, -3.625, -0.186, -1.507, -0.073, -4.043, -0.594, 4.069, -1.983, 1.052, -0.84, -1.965, 0.672, -1.359], &[0.818, -0.754, -1.396, 0.296, 1.239, 1.868, 1.806, 2.001, -0.799, -0.764, 0.854, 1.096, 1.279, -0.014, -0.667, 0.67, -0.592, -0.527, -0.928, -1.302, -4.624], 1.0458271085594589198e-1, 6.5187971526850261722e-1),
];

/// (groups, F, p)
pub const ANOVA: [(&[&[f64]], f64, f64); 10] = [
    (&[&[8.347, 10.892, 11.598, 11.045, 8.837, 11.886, 9.428, 8.115], &[8.294, 8.317, 15.333, 12.28, 11.275, 4.814, 11.243, 10.961, 13.368, 10.856, 9.865], &[11.045, 11.759, 7.566, 11.925, 9.321, 7.658, 9.452, 8.221, 10.06], &[12.856, 11.08, 9.308, 10.351, 12.627, 8.928, 10.267], &[9.207, 13.642, 11.62, 8.256, 10.521, 5.68]], 4.1296520330017303226e-1, 7.9811981002704431116e-1),
    (&[&[8.504, 11.684, 11.776, 10.07, 10.96, 10.34, 10.546, 10.516, 11.651, 8.856, 13.177, 9.415], &[12.681, 9.936, 13.979, 10.948, 10.381], &[10.531, 8.283, 11.643], &[13.307, 14.103, 13.49, 9.071, 12.166, 12.213, 9.477, 8.151, 11.072, 13.021]], 1.0461033175658246886, 3.8879217489244307523e-1),
    (&[&[9.798, 15.652, 9.624, 10.176, 9.71, 7.097, 7.08, 9.388, 10.285], &[12.848, 8.634, 10.503, 12.26, 10.207, 12.938, 11.993, 12.617, 10.375], &[16.693, 11.364, 12.074, 12.636, 10.656, 12.339, 13.25, 12.998, 12.414, 10.759, 10.345]], 3.9678637553684884136, 3.1340822642554014821e-2),
    (&[&[9.923, 10.864, 9.529, 10.344], &[10.335, 13.883, 15.537]], 5.4039509690689683894, 6.7661350015305465539e-2),
    (&[&[12.546, 8.634, 11.137, 11.133, 9.891, 9.536, 7.166, 13.656, 11.032, 12.187, 8.235, 9.63], &[6.361, 12.822, 8.206, 6.672, 8.473], &[11.224, 7.65, 12.37]], 1.457305120046818893, 2.6052861944491904155e-1),
    (&[&[8.11, 11.048, 10.208, 9.397], &[11.123, 7.776, 9.389, 8.28, 8.247, 10.237, 10.411, 11.381, 7.226, 7.925], &[10.754, 13.79, 12.118, 10.789, 11.587, 10.484, 14.018, 11.711, 13.953, 13.107, 10.445]], 1.1306499889405222314e+1, 4.1934725154368740626e-4),
    (&[&[6.992, 10.399, 10.295, 7.245], &[11.798, 11.328, 10.718, 14.097, 9.931, 13.24], &[9.307, 11.854, 12.502], &[12.243, 11.654, 10.919, 10.176, 12.168, 11.418], &[13.411, 14.934, 18.451, 13.546, 13.053, 9.619, 14.144, 15.341, 12.765, 13.039, 14.563]], 6.9674550655273470534, 6.5215579409283687256e-4),
    (&[&[9.036, 9.458, 5.115, 9.256], &[8.949, 9.491, 11.019, 12.161, 9.645], &[14.159, 11.474, 13.127, 15.277, 11.464, 9.729, 14.205, 10.721, 13.376, 13.701]], 1.048043744211029539e+1, 1.2331670728218846702e-3),
    (&[&[11.236, 10.537, 9.143, 12.828, 8.59, 11.348, 9.041, 8.612], &[11.437, 14.042, 12.105, 10.139, 6.077, 9.875, 10.639, 8.508, 7.584, 13.158, 14.285, 8.396], &[10.679, 10.463, 7.938, 13.331, 10.614, 6.695, 12.4, 8.728], &[9.55, 13.092, 10.993, 6.815]], 7.3119609211712469812e-2, 9.7390368305604383176e-1),
    (&[&[11.016, 14.358, 11.385, 11.575, 11.622, 9.066, 11.399, 9.623, 4.542, 9.813], &[13.316, 7.443, 10.714, 12.496, 12.362, 12.499, 11.472], &[8.712, 10.116, 9.122, 13.728, 8.538, 11.91, 10.846, 12.039, 9.153, 10.197], &[11.064, 13.793, 13.728, 9.034, 9.435, 12.277, 9.277, 10.906]], 5.4345755341088859765e-1, 6.5619111864582635592e-1),
];
