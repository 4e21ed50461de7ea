import java.util.List;

public class Invoice {
    private final List<Double> lines;
    private final double taxRate;

    Invoice(List<Double> lines, double taxRate) {
        this.lines = lines;
        this.taxRate = taxRate;
    }

    String render() {
        double subtotal = 0;
        for (double line : lines) {
            subtotal += line;
        }
        double total = subtotal * (1 + taxRate);
        return String.format("%.2f", total);
    }
}
