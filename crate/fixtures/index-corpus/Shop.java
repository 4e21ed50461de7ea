package demo.shop;

import java.util.ArrayList;
import java.util.List;

/** A tiny shop. */
public class Shop {
    private final List<String> items = new ArrayList<>();
    private int count, limit = 10;

    public Shop(int limit) {
        this.limit = limit;
    }

    public void add(String item) {
        if (count < limit) {
            items.add(item);
            count++;
        }
    }

    public int size() {
        return items.size();
    }
}
