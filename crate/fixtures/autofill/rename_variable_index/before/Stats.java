public class Stats {
    int sum(int[] xs) {
        int total = 0;
        for (int i = 0; i < xs.length; i++) {
            total += xs[i];
        }
        return total;
    }

    int max(int[] xs) {
        int best = xs[0];
        for (int i = 1; i < xs.length; i++) {
            best = Math.max(best, xs[i]);
        }
        return best;
    }
}
