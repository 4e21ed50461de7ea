package demo.geo;

public interface Shape {
    double PI_ISH = 3.14;

    double area();

    default String describe() {
        return String.format("%s with area %.2f", name(), area());
    }

    String name();
}
