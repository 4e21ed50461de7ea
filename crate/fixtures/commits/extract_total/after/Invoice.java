import java.util.List;

public class Invoice {
    private final List<Double> lines;
    private final double taxRate;

    Invoice(List<Double> lines, double taxRate) {
        this.lines = lines;
        this.taxRate = taxRate;
    }

    String render() {
        double total = total();
        return String.format("%.2f", total);
    }

    double total() {
        double subtotal = 0;
        for (double line : lines) {
            subtotal += line;
        }
        return subtotal * (1 + taxRate);
    }
}
