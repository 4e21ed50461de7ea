package app;

import app.text.Strings;

public class Main {
    public static void main(String[] args) {
        System.out.println(Strings.shout("hi"));
        Strings unused = Strings.none();
    }
}
