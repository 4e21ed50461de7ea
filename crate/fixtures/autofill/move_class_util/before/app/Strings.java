package app;

public final class Strings {
    private Strings() {
    }

    public static String shout(String s) {
        return s.toUpperCase();
    }

    public static Strings none() {
        return null;
    }
}
