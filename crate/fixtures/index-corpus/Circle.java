package demo.geo;

public class Circle implements Shape {
    private final double radius;

    public Circle(double radius) {
        this.radius = radius;
    }

    @Override
    public double area() {
        return PI_ISH * radius * radius;
    }

    @Override
    public String name() {
        return "circle";
    }

    public static Circle unit() {
        return new Circle(1.0);
    }
}
