package demo.util;

import java.util.Arrays;

public final class MathUtil {
    private MathUtil() {
    }

    public static long factorial(int n) {
        return n <= 1 ? 1 : n * factorial(n - 1);
    }

    public static int[] squares(int size) {
        int[] out = new int[size];
        for (int i = 0; i < size; i++) {
            out[i] = i * i;
        }
        return out;
    }

    public static double mean(double[] values) {
        double total = 0, count = values.length;
        for (double v : values) {
            total += v;
        }
        return count == 0 ? 0 : total / count;
    }

    public static <T extends Comparable<T>> T max(T a, T b) {
        return a.compareTo(b) >= 0 ? a : b;
    }

    public static String show(int[] data) {
        return Arrays.toString(Arrays.copyOf(data, Math.min(data.length, 3)));
    }
}
