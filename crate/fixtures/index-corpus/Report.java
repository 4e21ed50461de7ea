package demo.report;

import static java.lang.Math.max;

import java.util.List;
import java.util.Map;

// Builds a textual report: counts(words) and totals.
public class Report {
    /* mask = 0x1F; not code */
    private static final int MASK = 0x1F;
    private static final long LIMIT = 1_000L;
    private final double ratio = 3.5e-2f;

    public String render(Map<String, List<Integer>> data) {
        StringBuilder sb = new StringBuilder();
        for (Map.Entry<String, List<Integer>> e : data.entrySet()) {
            int best = 0;
            for (Integer x : e.getValue()) {
                best = max(best, x & MASK);
            }
            sb.append(e.getKey()).append(": ").append(best).append("\n\t\"done\"");
        }
        return sb.length() > LIMIT ? sb.substring(0, (int) LIMIT) : sb.toString();
    }
}
